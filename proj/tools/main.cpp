#include "homog/cli.hpp"

int main(int argc, char** argv) { return homog::cli_main(argc, argv); }

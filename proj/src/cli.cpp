#include "homog/cli.hpp"

#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace homog {

namespace {

using nlohmann::json;

std::vector<VectorXd> unit_circle_directions(int count) {
  std::vector<VectorXd> dirs;
  for (int i = 0; i < count; ++i) {
    double phi = 2.0 * M_PI * i / count + 0.3;  // avoid the axes by default
    VectorXd v(2);
    v << std::cos(phi), std::sin(phi);
    dirs.push_back(v);
  }
  return dirs;
}

CoefficientField field_from_json(const json& spec) {
  int dim = spec.at("dim").get<int>();
  int rows = spec.at("rows").get<int>();
  int cols = spec.at("cols").get<int>();
  int grid = spec.value("grid", 64);
  FourierMap terms;
  for (const auto& term : spec.at("terms")) {
    FreqVec f = term.at("freq").get<std::vector<int>>();
    MatrixXcd c(rows, cols);
    auto re = term.at("re");
    auto im = term.value("im", json());
    for (int i = 0; i < rows; ++i)
      for (int j = 0; j < cols; ++j)
        c(i, j) = Complex(re.at(i).at(j).get<double>(),
                          im.is_null() ? 0.0 : im.at(i).at(j).get<double>());
    terms[f] = c;
  }
  FieldFlags flags;
  flags.hermitian = spec.value("hermitian", false);
  flags.positive = spec.value("positive", false);
  flags.real_entries = spec.value("real", false);
  return CoefficientField::from_fourier(dim, rows, cols, std::move(terms), grid, flags);
}

ExampleCase example_from_spec(const ExperimentSpec& spec) {
  if (!spec.example.empty()) return make_example(spec.example);
  if (spec.field_json.empty()) throw Error("no example name and no inline field given");
  json j = json::parse(spec.field_json);
  ExampleCase ex;
  ex.name = j.value("name", "inline");
  ex.g = field_from_json(j.at("g"));
  ex.dim = ex.g.dim();
  if (j.contains("lattice")) {
    auto rows = j["lattice"].get<std::vector<std::vector<double>>>();
    MatrixXd basis(rows.size(), rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
      if (rows[i].size() != rows.size())
        throw Error("lattice: expected a square row-major basis matrix");
      for (size_t jj = 0; jj < rows.size(); ++jj) basis(i, jj) = rows[i][jj];
    }
    ex.lattice_basis = basis;
  }
  std::string sym = j.value("symbol", "gradient");
  if (sym == "gradient")
    ex.b = symbol_gradient(ex.dim);
  else if (sym == "elasticity")
    ex.b = symbol_elasticity(ex.dim);
  else if (sym == "hill")
    ex.b = symbol_hill(ex.dim);
  else
    throw Error("unknown symbol '" + sym + "'");
  if (j.contains("f")) ex.f = field_from_json(j.at("f"));
  if (j.contains("Q")) ex.Q = field_from_json(j.at("Q"));
  return ex;
}

json matrix_to_json(const MatrixXcd& m) {
  json re = json::array(), im = json::array();
  for (int i = 0; i < m.rows(); ++i) {
    json rrow = json::array(), irow = json::array();
    for (int j = 0; j < m.cols(); ++j) {
      rrow.push_back(m(i, j).real());
      irow.push_back(m(i, j).imag());
    }
    re.push_back(rrow);
    im.push_back(irow);
  }
  return json{{"re", re}, {"im", im}};
}

void write_file(const std::string& dir, const std::string& name, const std::string& content) {
  std::filesystem::create_directories(dir);
  std::ofstream os(dir + "/" + name, std::ios::binary);
  if (!os) throw Error("cannot open output file " + dir + "/" + name);
  os << content;
  if (!os) throw Error("write failure on " + dir + "/" + name);
}

}  // namespace

// ---------------------------------------------------------------------------
// CSV / SVG emitters

namespace {

std::string csv_quote(const std::string& s) {
  bool needs = s.find_first_of(",\"\r\n") != std::string::npos;
  if (!needs) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

void write_csv(std::ostream& os, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  auto emit_row = [&os](const std::vector<std::string>& row) {
    for (size_t i = 0; i < row.size(); ++i) {
      if (i) os << ',';
      os << csv_quote(row[i]);
    }
    os << "\r\n";
  };
  emit_row(header);
  for (const auto& row : rows) emit_row(row);
}

std::vector<std::vector<std::string>> parse_csv(std::istream& is) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string cell;
  bool quoted = false, any = false;
  int c;
  while ((c = is.get()) != EOF) {
    any = true;
    if (quoted) {
      if (c == '"') {
        if (is.peek() == '"') {
          cell += '"';
          is.get();
        } else {
          quoted = false;
        }
      } else {
        cell += static_cast<char>(c);
      }
      continue;
    }
    switch (c) {
      case '"':
        quoted = true;
        break;
      case ',':
        row.push_back(cell);
        cell.clear();
        break;
      case '\r':
        break;
      case '\n':
        row.push_back(cell);
        cell.clear();
        rows.push_back(row);
        row.clear();
        break;
      default:
        cell += static_cast<char>(c);
    }
  }
  if (any && (!cell.empty() || !row.empty())) {
    row.push_back(cell);
    rows.push_back(row);
  }
  return rows;
}

void write_loglog_svg(std::ostream& os, const std::vector<double>& x,
                      const std::vector<double>& y, double slope, double intercept) {
  const int W = 480, H = 360, pad = 48;
  double lx0 = 1e300, lx1 = -1e300, ly0 = 1e300, ly1 = -1e300;
  for (size_t i = 0; i < x.size(); ++i) {
    lx0 = std::min(lx0, std::log10(x[i]));
    lx1 = std::max(lx1, std::log10(x[i]));
    ly0 = std::min(ly0, std::log10(y[i]));
    ly1 = std::max(ly1, std::log10(y[i]));
  }
  if (lx1 - lx0 < 1e-9) lx1 = lx0 + 1;
  if (ly1 - ly0 < 1e-9) ly1 = ly0 + 1;
  auto X = [&](double lx) { return pad + (lx - lx0) / (lx1 - lx0) * (W - 2 * pad); };
  auto Y = [&](double ly) { return H - pad - (ly - ly0) / (ly1 - ly0) * (H - 2 * pad); };
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
     << "\">\n";
  os << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << H - pad << "\" x2=\"" << W - pad << "\" y2=\""
     << H - pad << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << pad << "\" y1=\"" << pad << "\" x2=\"" << pad << "\" y2=\"" << H - pad
     << "\" stroke=\"black\"/>\n";
  // fitted line in natural log: ln y = slope ln x + intercept
  auto fit_ly = [&](double lx) {
    double lnx = lx * std::log(10.0);
    return (slope * lnx + intercept) / std::log(10.0);
  };
  os << "<line x1=\"" << X(lx0) << "\" y1=\"" << Y(fit_ly(lx0)) << "\" x2=\"" << X(lx1)
     << "\" y2=\"" << Y(fit_ly(lx1)) << "\" stroke=\"steelblue\"/>\n";
  for (size_t i = 0; i < x.size(); ++i)
    os << "<circle cx=\"" << X(std::log10(x[i])) << "\" cy=\"" << Y(std::log10(y[i]))
       << "\" r=\"3\" fill=\"crimson\"/>\n";
  os << "<text x=\"" << pad << "\" y=\"" << pad - 12 << "\" font-size=\"12\">slope "
     << format_double(slope) << "</text>\n";
  os << "</svg>\n";
}

// ---------------------------------------------------------------------------
// Spec parsing

ExperimentSpec parse_spec(int argc, const char* const argv[]) {
  ExperimentSpec spec;
  if (argc < 2) throw Error("usage: homogctl <command> [options]");
  spec.command = argv[1];

  if (const char* env = std::getenv("HOMOG_THREADS")) spec.threads = std::atoi(env);

  std::string config_path;
  std::vector<std::string> positional;
  for (int i = 2; i < argc; ++i) {
    std::string a = argv[i];
    auto next = [&]() -> std::string {
      if (i + 1 >= argc) throw Error("missing value after " + a);
      return argv[++i];
    };
    if (a == "--config")
      config_path = next();
    else if (a == "--out")
      spec.out_dir = next();
    else if (a == "--threads")
      spec.threads = std::stoi(next());
    else if (a == "--seed")
      spec.seed = static_cast<unsigned>(std::stoul(next()));
    else if (a == "--cutoff")
      spec.cutoff = std::stoi(next());
    else if (a == "--grid")
      spec.grid = std::stoi(next());
    else if (a == "--tau")
      spec.tau = std::stod(next());
    else if (a == "--s")
      spec.s = std::stod(next());
    else if (a == "--example")
      spec.example = next();
    else if (a == "--svg")
      spec.emit_svg = true;
    else if (a.rfind("--", 0) == 0)
      throw Error("unknown flag " + a);
    else
      positional.push_back(a);
  }
  if (spec.command == "reproduce") {
    if (positional.size() != 1 && spec.example.empty())
      throw Error("usage: homogctl reproduce <example>");
    if (!positional.empty()) spec.example = positional[0];
  } else if (!positional.empty()) {
    throw Error("unexpected positional argument " + positional[0]);
  }

  if (!config_path.empty()) {
    std::ifstream is(config_path);
    if (!is) throw Error("cannot read config " + config_path);
    json cfg = json::parse(is);
    // Unknown keys are rejected so typos do not silently change a run.
    static const std::vector<std::string> known = {
        "command", "example", "field",      "out",   "threads", "seed",
        "cutoff",  "cell_cutoff", "grid",   "tau",   "s",       "eps",
        "theta",   "k_indices",   "m_list", "sandwiched", "svg", "directions",
        "lattice"};
    for (auto it = cfg.begin(); it != cfg.end(); ++it)
      if (std::find(known.begin(), known.end(), it.key()) == known.end())
        throw Error("unknown config key '" + it.key() + "'");
    if (cfg.contains("command")) spec.command = cfg["command"].get<std::string>();
    if (cfg.contains("example")) spec.example = cfg["example"].get<std::string>();
    if (cfg.contains("field")) {
      json field = cfg["field"];
      if (cfg.contains("lattice")) field["lattice"] = cfg["lattice"];
      spec.field_json = field.dump();
    }
    if (cfg.contains("out")) spec.out_dir = cfg["out"].get<std::string>();
    if (cfg.contains("threads")) spec.threads = cfg["threads"].get<int>();
    if (cfg.contains("seed")) spec.seed = cfg["seed"].get<unsigned>();
    if (cfg.contains("cutoff")) spec.cutoff = cfg["cutoff"].get<int>();
    if (cfg.contains("cell_cutoff")) spec.cell_cutoff = cfg["cell_cutoff"].get<int>();
    if (cfg.contains("grid")) spec.grid = cfg["grid"].get<int>();
    if (cfg.contains("tau")) spec.tau = cfg["tau"].get<double>();
    if (cfg.contains("s")) spec.s = cfg["s"].get<double>();
    if (cfg.contains("eps")) spec.eps_list = cfg["eps"].get<std::vector<double>>();
    if (cfg.contains("theta"))
      spec.thetas = cfg["theta"].get<std::vector<std::vector<double>>>();
    if (cfg.contains("k_indices")) spec.k_indices = cfg["k_indices"].get<std::vector<int>>();
    if (cfg.contains("m_list")) spec.m_list = cfg["m_list"].get<std::vector<int>>();
    if (cfg.contains("sandwiched")) spec.sandwiched = cfg["sandwiched"].get<bool>();
    if (cfg.contains("svg")) spec.emit_svg = cfg["svg"].get<bool>();
    if (cfg.contains("directions")) spec.direction_count = cfg["directions"].get<int>();
  }
  if (spec.cell_cutoff <= 0) spec.cell_cutoff = std::max(spec.cutoff, 32);
  if (spec.eps_list.empty())
    spec.eps_list = {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64, 1.0 / 128};
  if (spec.threads < 1) spec.threads = 1;
  return spec;
}

// ---------------------------------------------------------------------------
// Reproduce pipelines

bool ReproduceReport::pass() const {
  for (const auto& r : rows)
    if (!r.pass) return false;
  return !rows.empty();
}

namespace {

void add_row(ReproduceReport& rep, const std::string& quantity, double measured,
             const ReferenceValue& ref) {
  ReproduceRow row;
  row.quantity = quantity;
  row.measured = measured;
  row.reference = ref.value;
  row.tolerance = ref.tolerance;
  row.provenance = ref.provenance;
  row.pass = std::abs(measured - ref.value) <= ref.tolerance;
  rep.rows.push_back(row);
}

void add_check(ReproduceReport& rep, const std::string& quantity, double measured,
               double reference, double tol, const std::string& provenance) {
  ReferenceValue ref{quantity, reference, tol, provenance};
  add_row(rep, quantity, measured, ref);
}

ReproduceReport reproduce_isotropic() {
  ExampleCase ex = make_example("isotropic-elasticity");
  ReproduceReport rep;
  rep.example = ex.name;
  add_row(rep, "a", isotropic_elasticity_root(), ex.reference("a"));
  add_check(rep, "root_residual", isotropic_elasticity_root_residual(), 0.0, 1e-6, "analytic");
  IsotropicLayeredOracle o = isotropic_example_oracle();
  add_row(rep, "C", o.C, ex.reference("C"));
  add_row(rep, "theta1_sq", o.theta1_sq, ex.reference("theta1_sq"));
  add_row(rep, "S_abs", std::abs(o.S), ex.reference("S_abs"));
  add_row(rep, "T_abs", std::abs(o.T), ex.reference("T_abs"));
  add_check(rep, "S_re_over_abs", std::abs(o.S.real()) / std::abs(o.S), 0.0, 1e-8, "analytic");
  add_check(rep, "T_re_over_abs", std::abs(o.T.real()) / std::abs(o.T), 0.0, 1e-8, "analytic");
  add_row(rep, "mu_hat", o.mu_hat, ex.reference("mu_hat"));
  return rep;
}

ReproduceReport reproduce_elasticity_87() {
  ExampleCase ex = make_example("elasticity-87");
  FiberBundle bundle = FiberBundle::from_example(ex);
  ReproduceReport rep;
  rep.example = ex.name;
  CellSolution cell = solve_cell(ex.g, ex.b, bundle.lattice, 64);
  add_row(rep, "g0_11", cell.g0(0, 0).real(), {"", 1.0, 1e-8, "analytic"});
  add_row(rep, "g0_22", cell.g0(1, 1).real(), ex.reference("g2_underline"));
  add_row(rep, "g0_33", cell.g0(2, 2).real(), {"", 1.0, 1e-8, "analytic"});

  GermOptions opts;
  opts.c_star = bundle.c_star();
  double worst_gamma = 0;
  for (int i = 0; i < 32; ++i) {
    double phi = 2.0 * M_PI * i / 32 + 0.17;
    VectorXd theta(2);
    theta << std::cos(phi), std::sin(phi);
    GermPackage pkg = germ_package(cell, ex.b, theta, std::nullopt, opts);
    double t1t2 = theta(0) * theta(1);
    double lo = std::min(1.0 - t1t2, 1.0 + t1t2), hi = std::max(1.0 - t1t2, 1.0 + t1t2);
    worst_gamma = std::max(worst_gamma, std::abs(pkg.gammas(0) - lo));
    worst_gamma = std::max(worst_gamma, std::abs(pkg.gammas(1) - hi));
  }
  add_check(rep, "germ_gamma_sweep_dev", worst_gamma, 0.0, 1e-8, "analytic");

  VectorXd e2(2), e1(2);
  e2 << 0, 1;
  e1 << 1, 0;
  GermPackage at_e2 = germ_package(cell, ex.b, e2, std::nullopt, opts);
  GermPackage at_e1 = germ_package(cell, ex.b, e1, std::nullopt, opts);
  add_row(rep, "mu_at_e2", std::abs(at_e2.mus(1)), ex.reference("mu_degenerate"));
  add_check(rep, "n_norm_at_e1", operator_norm(at_e1.N_Q), 0.0, 1e-8, "analytic");
  add_check(rep, "n0_norm_at_e2", operator_norm(at_e2.N0), 0.125, 1e-6, "regression");
  // Jump of the split: just off the degenerate direction N0 collapses to 0.
  double phi = std::acos(-1.0) / 2 - 0.05;
  VectorXd near(2);
  near << std::cos(phi), std::sin(phi);
  GermPackage off = germ_package(cell, ex.b, near, std::nullopt, opts);
  add_check(rep, "n0_norm_off_degenerate", operator_norm(off.N0), 0.0, 1e-9, "analytic");
  add_check(rep, "nstar_norm_off_degenerate_positive",
            operator_norm(off.Nstar) > 1e-4 ? 1.0 : 0.0, 1.0, 0.0, "analytic");
  return rep;
}

ReproduceReport reproduce_acoustics(const std::string& name) {
  ExampleCase ex = make_example(name);
  FiberBundle bundle = FiberBundle::from_example(ex);
  ReproduceReport rep;
  rep.example = ex.name;
  CellSolution cell = solve_cell(ex.g, ex.b, bundle.lattice, 64);
  add_row(rep, "g0_22", cell.g0(1, 1).real(), ex.reference("g0_22"));
  GermOptions opts;
  opts.c_star = bundle.c_star();
  double expect = ex.reference("n_hat_e2").value;
  double worst = 0;
  for (int i = 0; i < 12; ++i) {
    double phi = 2.0 * M_PI * i / 12 + 0.05;
    VectorXd theta(2);
    theta << std::cos(phi), std::sin(phi);
    GermPackage pkg = germ_package(cell, ex.b, theta, std::nullopt, opts);
    double predicted = expect * theta(1) * theta(1) * theta(1);
    worst = std::max(worst, std::abs(pkg.N_Q(0, 0).real() - predicted) /
                                std::max(1e-12, std::abs(predicted)));
  }
  add_check(rep, "n_hat_formula_rel_dev", worst, 0.0, 1e-5, "analytic");
  return rep;
}

ReproduceReport reproduce_hill() {
  ExampleCase ex = make_example("hill-body");
  FiberBundle bundle = FiberBundle::from_example(ex);
  ReproduceReport rep;
  rep.example = ex.name;
  CellSolution cell = solve_cell(ex.g, ex.b, bundle.lattice, 64);
  add_row(rep, "g0_11", cell.g0(0, 0).real(), ex.reference("beta_underline"));
  add_row(rep, "g0_22", cell.g0(1, 1).real(), ex.reference("mu0_half"));
  MatrixXcd under = voigt_reuss(ex.g).first;
  add_check(rep, "g0_minus_underline", operator_norm(cell.g0 - under), 0.0, 1e-8, "analytic");
  return rep;
}

ReproduceReport reproduce_layered() {
  ExampleCase ex = make_example("layered-real-1d");
  FiberBundle bundle = FiberBundle::from_example(ex);
  ReproduceReport rep;
  rep.example = ex.name;
  CellSolution cell = solve_cell(ex.g, ex.b, bundle.lattice, 64);
  add_row(rep, "g0", cell.g0(0, 0).real(), ex.reference("g0"));
  Piecewise1D prof{[](double x) { return 2.0 + std::sin(x); }, {}};
  add_check(rep, "g0_vs_quadrature", cell.g0(0, 0).real() - layered_oracle_scalar(prof), 0.0,
            1e-9, "regression");
  return rep;
}

}  // namespace

ReproduceReport run_reproduce(const std::string& example_name) {
  if (example_name == "isotropic-elasticity") return reproduce_isotropic();
  if (example_name == "elasticity-87") return reproduce_elasticity_87();
  if (example_name == "acoustics-complex-0.1" || example_name == "acoustics-complex-0.2")
    return reproduce_acoustics(example_name);
  if (example_name == "hill-body") return reproduce_hill();
  if (example_name == "layered-real-1d") return reproduce_layered();
  throw Error("no reproduce pipeline for '" + example_name + "'");
}

// ---------------------------------------------------------------------------
// Command dispatch

namespace {

std::string vec_to_string(const VectorXd& v) {
  std::string out;
  for (int i = 0; i < v.size(); ++i) {
    if (i) out += ' ';
    out += format_double(v(i));
  }
  return out;
}

int cmd_effmat(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  FiberBundle bundle = FiberBundle::from_example(ex);
  CellSolution cell = solve_cell(ex.g, ex.b, bundle.lattice, spec.cell_cutoff);
  auto [under, over] = voigt_reuss(ex.g);
  json rec;
  rec["example"] = ex.name;
  rec["cutoff"] = spec.cell_cutoff;
  rec["g0"] = matrix_to_json(cell.g0);
  rec["underline"] = matrix_to_json(under);
  rec["overline"] = matrix_to_json(over);
  rec["residual"] = cell.residual;
  std::string text = rec.dump(2) + "\n";
  write_file(spec.out_dir, "effmat-" + ex.name + ".json", text);
  out << text;
  return 0;
}

int cmd_germ_sweep(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  FiberBundle bundle = FiberBundle::from_example(ex);
  if (ex.dim != 2) throw Error("germ-sweep: direction sweep implemented for d = 2");
  CellSolution cell = solve_cell(ex.g, ex.b, bundle.lattice, spec.cell_cutoff);
  std::optional<WeightedConstants> wc;
  if (ex.f || ex.Q) wc = weighted_constants(cell, ex.f, ex.Q);
  GermOptions opts;
  opts.c_star = bundle.c_star();

  std::vector<VectorXd> dirs;
  for (const auto& th : spec.thetas) {
    VectorXd v = Eigen::Map<const VectorXd>(th.data(), th.size());
    dirs.push_back(v.normalized());
  }
  if (dirs.empty()) dirs = unit_circle_directions(spec.direction_count);

  std::vector<std::string> header = {"theta",   "gammas",     "mus",   "clusters",
                                     "n_norm",  "n0_norm",    "nstar_norm", "c_circ",
                                     "ambiguous"};
  std::vector<std::vector<std::string>> rows;
  for (const VectorXd& theta : dirs) {
    GermPackage pkg = germ_package(cell, ex.b, theta, wc, opts);
    std::string gam, mus, clus;
    for (int i = 0; i < pkg.gammas.size(); ++i) {
      if (i) gam += ' ', mus += ' ';
      gam += format_double(pkg.gammas(i));
      mus += format_double(pkg.mus(i));
    }
    for (size_t i = 0; i < pkg.clusters.size(); ++i) {
      if (i) clus += ' ';
      clus += std::to_string(pkg.clusters[i].first) + ":" +
              std::to_string(pkg.clusters[i].second);
    }
    rows.push_back({vec_to_string(theta), gam, mus, clus,
                    format_double(operator_norm(pkg.N_Q)), format_double(operator_norm(pkg.N0)),
                    format_double(operator_norm(pkg.Nstar)),
                    std::isfinite(pkg.c_circ) ? format_double(pkg.c_circ) : "inf",
                    pkg.cluster_ambiguous ? "1" : "0"});
  }
  std::ostringstream csv;
  write_csv(csv, header, rows);
  write_file(spec.out_dir, "germ-" + ex.name + ".csv", csv.str());
  out << csv.str();
  return 0;
}

int cmd_bands(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  FiberBundle bundle = FiberBundle::from_example(ex);
  VectorXd theta;
  if (!spec.thetas.empty()) {
    theta = Eigen::Map<const VectorXd>(spec.thetas[0].data(), spec.thetas[0].size());
    theta.normalize();
  } else {
    theta = VectorXd::Zero(ex.dim);
    theta(ex.dim - 1) = 1.0;
  }
  const double r0 = bundle.lattice.r0();
  std::vector<std::string> header = {"t"};
  const int nbands = 2 * ex.b.cols() + 2;
  for (int j = 1; j <= nbands; ++j) header.push_back("E" + std::to_string(j));
  std::vector<std::vector<std::string>> rows;
  for (const VectorXd& k : radial_samples(bundle.lattice, theta, r0 / 2, 16)) {
    FiberOperator op = assemble(bundle, k, spec.cutoff,
                                (ex.f || ex.Q) ? FiberKind::WeightedMass : FiberKind::Plain);
    EigenDecomposition dec = eigendecompose(op);
    std::vector<std::string> row = {format_double(k.norm())};
    for (int j = 0; j < nbands && j < dec.count(); ++j)
      row.push_back(format_double(dec.eigenvalue(j)));
    rows.push_back(row);
  }
  std::ostringstream csv;
  write_csv(csv, header, rows);
  write_file(spec.out_dir, "bands-" + ex.name + ".csv", csv.str());
  out << csv.str();
  return 0;
}

int cmd_cos_error(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  EstimatesContext ctx = make_context(FiberBundle::from_example(ex), spec.cell_cutoff);
  KGrid grid = brillouin_grid(ctx.bundle.lattice, spec.grid);
  std::vector<std::string> header = {"k", "eps", "tau", "s", "fiber_error", "cutoff"};
  std::vector<std::vector<std::string>> rows;
  for (double eps : spec.eps_list)
    for (const VectorXd& k : grid.points) {
      ErrorSample smp = fiber_error(ctx, k, eps, spec.tau, spec.s, spec.cutoff, spec.sandwiched);
      rows.push_back({vec_to_string(k), format_double(eps), format_double(spec.tau),
                      format_double(spec.s), format_double(smp.fiber_error),
                      std::to_string(spec.cutoff)});
    }
  std::ostringstream csv;
  write_csv(csv, header, rows);
  write_file(spec.out_dir, "cos-error-" + ex.name + ".csv", csv.str());
  out << csv.str();
  return 0;
}

int cmd_rate(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  EstimatesContext ctx = make_context(FiberBundle::from_example(ex), spec.cell_cutoff);
  KGrid grid = brillouin_grid(ctx.bundle.lattice, spec.grid);
  double eps_min = *std::min_element(spec.eps_list.begin(), spec.eps_list.end());
  VectorXd probe_k = VectorXd::Zero(ex.dim);
  probe_k(ex.dim - 1) = ctx.bundle.lattice.r0() / 2;
  validate_phase_resolution(ctx, probe_k, eps_min, spec.tau, spec.s, spec.cutoff,
                            spec.sandwiched);
  RateReport report =
      rate_experiment(ctx, spec.s, spec.tau, spec.eps_list, grid, spec.cutoff, spec.sandwiched);

  std::vector<std::string> header = {"eps", "global_error", "argmax_k"};
  std::vector<std::vector<std::string>> rows;
  for (size_t i = 0; i < report.eps.size(); ++i)
    rows.push_back({format_double(report.eps[i]), format_double(report.global_errors[i]),
                    vec_to_string(report.argmax[i])});
  std::ostringstream csv;
  write_csv(csv, header, rows);
  write_file(spec.out_dir, "rate-" + ex.name + ".csv", csv.str());

  json rec;
  rec["example"] = ex.name;
  rec["s"] = spec.s;
  rec["tau"] = spec.tau;
  rec["slope"] = report.slope;
  rec["intercept"] = report.intercept;
  rec["eps"] = report.eps;
  rec["global_errors"] = report.global_errors;
  std::string text = rec.dump(2) + "\n";
  write_file(spec.out_dir, "rate-" + ex.name + ".json", text);
  if (spec.emit_svg) {
    std::ostringstream svg;
    write_loglog_svg(svg, report.eps, report.global_errors, report.slope, report.intercept);
    write_file(spec.out_dir, "rate-" + ex.name + ".svg", svg.str());
  }
  out << text;
  return 0;
}

int cmd_sharpness(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  EstimatesContext ctx = make_context(FiberBundle::from_example(ex), spec.cell_cutoff);
  CellSolution cell = solve_cell(ex.g, ex.b, ctx.bundle.lattice, spec.cell_cutoff);
  VectorXd theta;
  if (!spec.thetas.empty()) {
    theta = Eigen::Map<const VectorXd>(spec.thetas[0].data(), spec.thetas[0].size());
    theta.normalize();
  } else {
    theta = VectorXd::Zero(ex.dim);
    theta(ex.dim - 1) = 1.0;
  }
  GermOptions opts;
  opts.c_star = ctx.bundle.c_star();
  GermPackage pkg = germ_package(cell, ex.b, theta, std::nullopt, opts);
  SharpnessProbe probe = sharpness_probe(ctx, pkg, spec.tau, spec.s, spec.k_indices, spec.cutoff);
  json rec;
  rec["example"] = ex.name;
  rec["s"] = spec.s;
  rec["tau"] = spec.tau;
  rec["gamma"] = probe.gamma;
  rec["mu"] = probe.mu;
  rec["index_base"] = probe.index_base;
  rec["indices"] = probe.indices;
  rec["eps"] = probe.eps;
  rec["q"] = probe.q;
  rec["growth_ratio"] = probe.growth_ratio;
  std::string text = rec.dump(2) + "\n";
  write_file(spec.out_dir, "sharpness-" + ex.name + ".json", text);
  out << text;
  return 0;
}

int cmd_cauchy(const ExperimentSpec& spec, std::ostream& out) {
  ExampleCase ex = example_from_spec(spec);
  EstimatesContext ctx = make_context(FiberBundle::from_example(ex), spec.cell_cutoff);
  // Fixed band-limited datum: one low mode per axis, H^s-normalized later.
  TorusData data;
  FreqVec mode(ex.dim, 0);
  mode[0] = 1;
  data.phi[mode] = VectorXcd::Ones(ex.b.cols());

  std::vector<std::string> header = {"M", "eps", "error_l2", "normalized"};
  std::vector<std::vector<std::string>> rows;
  std::vector<double> eps_list, errors;
  for (int M : spec.m_list) {
    CauchyResult res = cauchy_error(ctx, data, spec.tau, M, spec.s, spec.cutoff);
    rows.push_back({std::to_string(M), format_double(1.0 / M), format_double(res.error_l2),
                    format_double(res.normalized)});
    eps_list.push_back(1.0 / M);
    errors.push_back(res.normalized);
  }
  std::ostringstream csv;
  write_csv(csv, header, rows);
  write_file(spec.out_dir, "cauchy-" + ex.name + ".csv", csv.str());
  json rec;
  rec["example"] = ex.name;
  rec["s"] = spec.s;
  rec["tau"] = spec.tau;
  rec["slope"] = loglog_slope(eps_list, errors);
  std::string text = rec.dump(2) + "\n";
  write_file(spec.out_dir, "cauchy-" + ex.name + ".json", text);
  out << text;
  return 0;
}

int cmd_reproduce(const ExperimentSpec& spec, std::ostream& out) {
  ReproduceReport rep = run_reproduce(spec.example);
  std::vector<std::string> header = {"example", "quantity", "measured",
                                     "reference", "tolerance", "provenance", "pass"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& r : rep.rows)
    rows.push_back({rep.example, r.quantity, format_double(r.measured),
                    format_double(r.reference), format_double(r.tolerance), r.provenance,
                    r.pass ? "pass" : "FAIL"});
  std::ostringstream csv;
  write_csv(csv, header, rows);
  write_file(spec.out_dir, "reproduce-" + rep.example + ".csv", csv.str());
  out << csv.str();
  return rep.pass() ? 0 : 1;
}

}  // namespace

int run(const ExperimentSpec& spec, std::ostream& out, std::ostream& err) {
  set_sweep_threads(spec.threads);
  try {
    if (spec.command == "effmat") return cmd_effmat(spec, out);
    if (spec.command == "germ-sweep") return cmd_germ_sweep(spec, out);
    if (spec.command == "bands") return cmd_bands(spec, out);
    if (spec.command == "cos-error") return cmd_cos_error(spec, out);
    if (spec.command == "rate") return cmd_rate(spec, out);
    if (spec.command == "sharpness") return cmd_sharpness(spec, out);
    if (spec.command == "cauchy") return cmd_cauchy(spec, out);
    if (spec.command == "reproduce") return cmd_reproduce(spec, out);
    err << "{\"error\":\"unknown command '" << spec.command << "'\"}\n";
    return 2;
  } catch (const Error& e) {
    err << "{\"error\":" << nlohmann::json(e.what()).dump() << "}\n";
    return 1;
  }
}

int cli_main(int argc, const char* const argv[]) {
  try {
    ExperimentSpec spec = parse_spec(argc, argv);
    return run(spec, std::cout, std::cerr);
  } catch (const Error& e) {
    std::cerr << "{\"error\":" << nlohmann::json(e.what()).dump() << "}\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "{\"error\":" << nlohmann::json(e.what()).dump() << "}\n";
    return 2;
  }
}

}  // namespace homog

#include "cli.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>
#include <variant>

#include <CLI11.hpp>

#include "treejacobi/cover.hpp"
#include "treejacobi/errors.hpp"
#include "treejacobi/gap.hpp"
#include "treejacobi/graph.hpp"
#include "treejacobi/green_models.hpp"
#include "treejacobi/mfunction.hpp"
#include "treejacobi/models.hpp"
#include "treejacobi/rgmodel.hpp"
#include "treejacobi/spectral.hpp"

namespace treejac {

namespace {

using namespace treejacobi;

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Cell = std::variant<std::string, double, long long>;

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;
};

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string format_cell(const Cell& cell, bool csv) {
  if (const auto* s = std::get_if<std::string>(&cell)) return csv ? csv_field(*s) : *s;
  if (const auto* n = std::get_if<long long>(&cell)) return std::to_string(*n);
  std::ostringstream os;
  const double v = std::get<double>(cell);
  os << std::setprecision(csv ? 17 : 9) << (v == 0.0 ? 0.0 : v);
  return os.str();
}

void render(const Table& table, bool csv, std::ostream& out) {
  std::vector<std::vector<std::string>> text;
  text.push_back(table.header);
  for (const auto& row : table.rows) {
    std::vector<std::string> line;
    for (const auto& cell : row) line.push_back(format_cell(cell, csv));
    text.push_back(std::move(line));
  }
  if (csv) {
    for (const auto& line : text) {
      for (std::size_t c = 0; c < line.size(); ++c) out << (c ? "," : "") << (line[c]);
      out << '\n';
    }
    return;
  }
  std::vector<std::size_t> width(table.header.size(), 0);
  for (const auto& line : text)
    for (std::size_t c = 0; c < line.size(); ++c) width[c] = std::max(width[c], line[c].size());
  for (const auto& line : text) {
    std::string s;
    for (std::size_t c = 0; c < line.size(); ++c) {
      s += line[c];
      if (c + 1 < line.size()) s += std::string(width[c] - line[c].size() + 2, ' ');
    }
    out << s << '\n';
  }
}

struct Output {
  std::string format;
  std::string path;
};

struct Input {
  std::string graph_path;
  std::string model;
};

struct ScanFlags {
  std::vector<double> range;
  std::vector<double> eps{1e-2, 1e-3, 1e-4};
  int resolution = 801;
  double band_threshold = 1e-6;
  double edge_tolerance = 1e-6;
  unsigned threads = 0;
};

// Subcommands share one Output; the per-subcommand default is applied after parsing.
void add_output(CLI::App* cmd, Output& o, const std::string& default_format) {
  cmd->add_option("--format", o.format, "Output format")
      ->check(CLI::IsMember({"table", "csv"}))
      ->default_str(default_format);
  cmd->add_option("--out", o.path, "Write the report to this file instead of standard output");
}

void add_input(CLI::App* cmd, Input& in) {
  cmd->add_option("graph", in.graph_path, "Graph file");
  cmd->add_option("--model", in.model,
                  "Built-in model instead of a file: free:d, rg:r,g, altb:b, cube, petersen, complete:n");
}

void add_scan(CLI::App* cmd, ScanFlags& s) {
  cmd->add_option("--range", s.range, "Scan interval lo,hi (default: spectral radius of J +- 1)")
      ->delimiter(',')
      ->expected(2);
  cmd->add_option("--resolution", s.resolution, "Number of grid points")->check(CLI::Range(10, 100'000'000));
  cmd->add_option("--eps", s.eps, "Broadenings e1,e2,... used on the grid")
      ->delimiter(',')
      ->check(CLI::PositiveNumber);
  cmd->add_option("--band-threshold", s.band_threshold, "Density above which a point is in a band")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--edge-tolerance", s.edge_tolerance, "Band-edge bisection tolerance")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--threads", s.threads, "Worker threads for the grid (0 = all cores)");
}

ScanOptions scan_options(const ScanFlags& s) {
  ScanOptions o;
  if (s.range.size() == 2) {
    if (!(s.range[0] < s.range[1])) throw UsageError("--range needs lo < hi");
    o.lo = s.range[0];
    o.hi = s.range[1];
  }
  o.resolution = s.resolution;
  o.eps = s.eps;
  o.band_threshold = s.band_threshold;
  o.edge_tolerance = s.edge_tolerance;
  o.threads = s.threads;
  return o;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw UsageError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

GraphWithParams load(const Input& in) {
  if (!in.graph_path.empty() && !in.model.empty())
    throw UsageError("give either a graph file or --model, not both");
  if (!in.model.empty()) return model_from_spec(in.model);
  if (in.graph_path.empty()) throw UsageError("missing graph file (or --model)");
  try {
    return parse_graph(read_file(in.graph_path));
  } catch (const ParseError& e) {
    throw UsageError(in.graph_path + ": " + e.what());
  }
}

double parse_number(std::string_view text, const std::string& what) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw UsageError("invalid " + what + " '" + std::string(text) + "'");
  return v;
}

int parse_int(std::string_view text, const std::string& what) {
  int v = 0;
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
  if (ec != std::errc{} || ptr != text.data() + text.size())
    throw UsageError("invalid " + what + " '" + std::string(text) + "'");
  return v;
}

ModelGreen closed_form_model(const std::string& spec, const std::string& site) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string_view args = colon == std::string::npos ? std::string_view{} : std::string_view(spec).substr(colon + 1);
  if (kind == "free") {
    if (!site.empty()) throw UsageError("the free model has no --site");
    return FreeModel{parse_int(args, "degree")};
  }
  if (kind == "rg") {
    const auto comma = args.find(',');
    if (comma == std::string_view::npos) throw UsageError("expected rg:r,g");
    if (!site.empty() && site != "red" && site != "green") throw UsageError("rg sites are red and green");
    return RgModel{parse_int(args.substr(0, comma), "r"), parse_int(args.substr(comma + 1), "g"),
                   site == "green" ? RgSite::green : RgSite::red};
  }
  if (kind == "altb") {
    if (!site.empty() && site != "plus" && site != "minus") throw UsageError("altb sites are plus and minus");
    return AltModel{parse_number(args, "b"), site == "minus" ? AltSite::minus : AltSite::plus};
  }
  throw UsageError("closed forms exist for free:d, rg:r,g and altb:b, not '" + spec + "'");
}

Table perron_table(const GraphWithParams& gp) {
  Table t{{"quantity", "value"}, {}};
  const auto pair = perron(gp.graph, gp.params);
  t.rows.push_back({std::string("sigma"), pair.sigma});
  t.rows.push_back({std::string("sigma_minus"), perron_minus(gp.graph, gp.params).sigma_minus});
  for (int v = 0; v < gp.graph.vertex_count(); ++v)
    t.rows.push_back({"psi[" + gp.graph.vertices()[v] + "]", pair.psi[v]});
  return t;
}

Table spectrum_table(const GraphWithParams& gp, const ScanOptions& options) {
  const auto report = spectrum_scan(gp.graph, gp.params, options).report;
  Table t{{"kind", "lo", "hi", "weight"}, {}};
  for (const auto& b : report.bands) t.rows.push_back({std::string("band"), b.lo, b.hi, std::string()});
  for (const auto& pm : report.point_masses)
    t.rows.push_back({std::string("point_mass"), pm.energy, pm.energy, pm.weight});
  t.rows.push_back({std::string("Sigma"), report.sigma_top, report.sigma_top, std::string()});
  t.rows.push_back({std::string("Sigma_minus"), report.sigma_bottom, report.sigma_bottom, std::string()});
  return t;
}

Table dos_table(const GraphWithParams& gp, const ScanOptions& options) {
  const auto result = spectrum_scan(gp.graph, gp.params, options);
  Table t{{"x", "density", "eps_used"}, {}};
  for (const auto& s : result.samples) t.rows.push_back({s.x, s.density, s.eps_used});
  return t;
}

Table gap_report_table(const GraphWithParams& gp, const ScanOptions& options) {
  const auto r = gap_report(gp.graph, gp.params, options);
  Table t{{"quantity", "value"}, {}};
  t.rows.push_back({std::string("sigma"), r.sigma});
  t.rows.push_back({std::string("Sigma"), r.Sigma});
  t.rows.push_back({std::string("gap"), r.gap});
  t.rows.push_back({std::string("bipartite"), std::string(r.bipartite ? "yes" : "no")});
  if (r.bipartite) {
    t.rows.push_back({std::string("sigma_minus"), r.sigma_minus});
    t.rows.push_back({std::string("Sigma_minus"), r.Sigma_minus});
    t.rows.push_back({std::string("gap_minus"), r.gap_minus});
  }
  return t;
}

struct BoundsFlags {
  std::string tilde_path;
  std::optional<double> reference;
  bool minus = false;
};

Table gap_bounds_table(const GraphWithParams& gp, const BoundsFlags& f, const ScanOptions& options) {
  JacobiParams tilde{std::vector<double>(gp.graph.edge_count(), 1.0),
                     std::vector<double>(gp.graph.vertex_count(), 0.0)};
  if (!f.tilde_path.empty()) {
    auto other = parse_graph(read_file(f.tilde_path));
    if (!(other.graph == gp.graph))
      throw ValidationError("comparison graph '" + f.tilde_path + "' differs from the input graph");
    tilde = std::move(other.params);
  }
  const auto bounds = f.minus ? gap_minus_quantities(gp.graph, gp.params, tilde, f.reference, options)
                              : gap_quantities(gp.graph, gp.params, tilde, f.reference, options);
  const auto report = gap_report(gp.graph, gp.params, options);
  const double estimate = f.minus ? report.gap_minus : report.gap;
  Table t{{"quantity", "value"}, {}};
  t.rows.push_back({std::string("S"), bounds.S});
  t.rows.push_back({std::string("I"), bounds.I});
  t.rows.push_back({std::string("S_tilde"), bounds.S_tilde});
  t.rows.push_back({std::string("I_tilde"), bounds.I_tilde});
  t.rows.push_back({std::string("reference_gap"), bounds.reference_gap});
  t.rows.push_back({std::string("lower"), bounds.lower});
  t.rows.push_back({std::string("upper"), bounds.upper});
  t.rows.push_back({std::string(f.minus ? "gap_minus" : "gap"), estimate});
  const bool inside = estimate >= bounds.lower - options.edge_tolerance &&
                      estimate <= bounds.upper + options.edge_tolerance;
  t.rows.push_back({std::string("within_bounds"), std::string(inside ? "yes" : "no")});
  return t;
}

struct GreenFlags {
  std::string model;
  std::string site;
  std::string sheet = "I";
  std::vector<double> z;
  std::optional<double> audit;
};

void add_complex(Table& t, const std::string& name, cplx v) {
  t.rows.push_back({name + ".re", v.real()});
  t.rows.push_back({name + ".im", v.imag()});
}

Table green_table(const GreenFlags& f) {
  if (f.model.empty()) throw UsageError("green needs --model free:d, rg:r,g or altb:b");
  if (f.z.empty() && !f.audit) throw UsageError("green needs --z re,im and/or --audit z0");
  const auto model = closed_form_model(f.model, f.site);
  Table t{{"quantity", "value"}, {}};
  if (!f.z.empty()) {
    const Sheet sheet = f.sheet == "II" ? Sheet::II : Sheet::I;
    add_complex(t, "G", evaluate(model, {cplx{f.z[0], f.z[1]}, sheet}));
  }
  if (f.audit) {
    const auto audit = pole_audit(model, *f.audit);
    t.rows.push_back({std::string("audit.z0"), *f.audit});
    t.rows.push_back({std::string("audit.outcome"), to_string(audit.outcome)});
    for (const auto& [name, side] : {std::pair{"sheet_I", audit.sheet_one}, std::pair{"sheet_II", audit.sheet_two}}) {
      t.rows.push_back({std::string(name), to_string(side.kind)});
      if (side.kind == PointKind::pole)
        add_complex(t, std::string(name) + ".residue", side.residue);
      else
        add_complex(t, std::string(name) + ".value", side.value);
    }
  }
  return t;
}

Table rg_verify_table(int r, int g, int depth) {
  const auto norm = u_norm_sq(r, g, depth);
  const auto residue = residue_check(r, g);
  Table t{{"quantity", "computed", "expected"}, {}};
  t.rows.push_back({std::string("norm_sq"), norm.partial, norm.limit});
  t.rows.push_back({std::string("Hu_residual"), verify_Hu_zero(r, g, depth), 0.0});
  t.rows.push_back({std::string("residue_red"), residue.residue, residue.expected});
  t.rows.push_back({std::string("residue_green"), green_site_residue(r, g), 0.0});
  t.rows.push_back({std::string("dos_weight"), dos_zero_weight(r, g),
                    static_cast<double>(r - g) / static_cast<double>(r + g)});
  return t;
}

Table ball_table(const GraphWithParams& gp, int radius, const std::string& base_id, std::size_t budget) {
  int base = 0;
  if (!base_id.empty()) {
    const auto found = gp.graph.find_vertex(base_id);
    if (!found) throw UsageError("unknown base vertex '" + base_id + "'");
    base = *found;
  }
  Table t{{"radius", "nodes", "lanczos_top"}, {}};
  for (int r = 0; r <= radius; ++r) {
    const auto ball = build_ball(gp.graph, gp.params, base, r, {.node_budget = budget});
    t.rows.push_back({static_cast<long long>(r), static_cast<long long>(ball.size()), lanczos_top(ball)});
  }
  return t;
}

Table validate_table(const GraphWithParams& gp) {
  Table t{{"quantity", "value"}, {}};
  t.rows.push_back({std::string("vertices"), static_cast<long long>(gp.graph.vertex_count())});
  t.rows.push_back({std::string("edges"), static_cast<long long>(gp.graph.edge_count())});
  t.rows.push_back({std::string("bipartite"), std::string(is_bipartite(gp.graph).bipartite() ? "yes" : "no")});
  t.rows.push_back({std::string("status"), std::string("ok")});
  return t;
}

void emit(const Table& table, const Output& o, std::ostream& out) {
  const bool csv = o.format == "csv";
  if (o.path.empty()) {
    render(table, csv, out);
    return;
  }
  std::ofstream file(o.path, std::ios::binary);
  if (!file) throw UsageError("cannot write '" + o.path + "'");
  render(table, csv, file);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Spectral toolkit for periodic Jacobi matrices on universal-cover trees", "treejac"};
  app.option_defaults()->always_capture_default();
  app.require_subcommand(1);

  Input input;
  Output output;
  ScanFlags scan;

  auto* validate = app.add_subcommand("validate", "Parse and validate a graph file");
  add_input(validate, input);
  add_output(validate, output, "table");

  auto* perron_cmd = app.add_subcommand("perron", "Top eigenvalue and positive eigenvector of J");
  add_input(perron_cmd, input);
  add_output(perron_cmd, output, "table");

  auto* spectrum = app.add_subcommand("spectrum", "Bands and point masses of the tree operator");
  add_input(spectrum, input);
  add_scan(spectrum, scan);
  add_output(spectrum, output, "table");

  auto* gap_cmd = app.add_subcommand("gap-report", "sigma, Sigma and the gap (and the lower gap when bipartite)");
  add_input(gap_cmd, input);
  add_scan(gap_cmd, scan);
  add_output(gap_cmd, output, "table");

  BoundsFlags bounds;
  auto* bounds_cmd = app.add_subcommand("gap-bounds", "Comparison bounds against a second parameter set");
  add_input(bounds_cmd, input);
  bounds_cmd->add_option("--tilde", bounds.tilde_path,
                         "Graph file with the comparison parameters (default a = 1, b = 0)");
  bounds_cmd->add_option("--reference", bounds.reference, "Gap of the comparison parameters (default: scanned)");
  bounds_cmd->add_flag("--minus", bounds.minus, "Bound the lower gap of a bipartite graph");
  add_scan(bounds_cmd, scan);
  add_output(bounds_cmd, output, "table");

  GreenFlags green;
  auto* green_cmd = app.add_subcommand("green", "Closed-form Green's function on either sheet");
  green_cmd->add_option("--model", green.model, "free:d, rg:r,g or altb:b");
  green_cmd->add_option("--site", green.site, "red|green for rg, plus|minus for altb (default red / plus)");
  green_cmd->add_option("--sheet", green.sheet, "Sheet")->check(CLI::IsMember({"I", "II"}));
  green_cmd->add_option("--z", green.z, "Energy re,im (write --z=-1,0.5 for a negative real part)")
      ->delimiter(',')
      ->expected(2);
  green_cmd->add_option("--audit", green.audit, "Classify the real point z0 on both sheets");
  add_output(green_cmd, output, "table");

  auto* dos_cmd = app.add_subcommand("dos", "Density of states on the scan grid");
  add_input(dos_cmd, input);
  add_scan(dos_cmd, scan);
  add_output(dos_cmd, output, "csv");

  int r = 0, g = 0, depth = 4;
  auto* rg_cmd = app.add_subcommand("rg-verify", "Zero-energy eigenfunction identities of the rg model");
  rg_cmd->add_option("r", r, "Red vertex count")->required();
  rg_cmd->add_option("g", g, "Green vertex count")->required();
  rg_cmd->add_option("--depth", depth, "Truncation depth K (levels 0..2K)")->check(CLI::Range(2, 40));
  add_output(rg_cmd, output, "table");

  int radius = 8;
  std::string base;
  std::size_t budget = BallOptions{}.node_budget;
  auto* ball_cmd = app.add_subcommand("ball-eig", "Lanczos top eigenvalue of cover balls of radius 0..R");
  add_input(ball_cmd, input);
  ball_cmd->add_option("--radius", radius, "Largest radius R")->check(CLI::NonNegativeNumber);
  ball_cmd->add_option("--base", base, "Base vertex id (default: first vertex)");
  ball_cmd->add_option("--node-budget", budget, "Largest admissible ball");
  add_output(ball_cmd, output, "table");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? 0 : 1;
  }

  if (output.format.empty()) output.format = dos_cmd->parsed() ? "csv" : "table";

  try {
    Table table;
    if (validate->parsed()) {
      table = validate_table(load(input));
    } else if (perron_cmd->parsed()) {
      table = perron_table(load(input));
    } else if (spectrum->parsed()) {
      table = spectrum_table(load(input), scan_options(scan));
    } else if (gap_cmd->parsed()) {
      table = gap_report_table(load(input), scan_options(scan));
    } else if (bounds_cmd->parsed()) {
      table = gap_bounds_table(load(input), bounds, scan_options(scan));
    } else if (green_cmd->parsed()) {
      table = green_table(green);
    } else if (dos_cmd->parsed()) {
      table = dos_table(load(input), scan_options(scan));
    } else if (rg_cmd->parsed()) {
      table = rg_verify_table(r, g, depth);
    } else {
      table = ball_table(load(input), radius, base, budget);
    }
    emit(table, output, out);
    return 0;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const UsageError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::invalid_argument& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const std::length_error& e) {
    err << "error: " << e.what() << " (lower --radius or raise --node-budget)\n";
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace treejac

// fredholm_lab: command-line front end for the kernel, determinant, growth,
// Monte Carlo and edge-limit experiments.

#include <unistd.h>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <regex>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fredholm/acceptance.hpp"
#include "fredholm/errors.hpp"
#include "fredholm/growth.hpp"
#include "fredholm/kernels.hpp"
#include "fredholm/mc_oracle.hpp"
#include "fredholm/parallel.hpp"
#include "fredholm/spectral.hpp"
#include "fredholm/symbols.hpp"
#include "fredholm/twlimit.hpp"
#include "json.hpp"

using namespace fredholm;
using json = nlohmann::ordered_json;

namespace {

constexpr const char* kVersion = "1.0.0";

enum ExitCode { kOk = 0, kArgument = 1, kConvergence = 2, kViolation = 3 };

// Raw flag values; every numeric flag is parsed by hand so that only plain
// decimal notation is accepted.
struct Flags {
  std::string family = "exp";
  std::string t, n, m, alpha, r, s, v, size, tol, seed, samples, rs, ss, offset, grid, method;
  std::string format = "json";
  std::string out;
  std::string threads;
};

double parse_decimal(const std::string& text, const std::string& flag) {
  static const std::regex re(R"([+-]?(\d+\.?\d*|\.\d+))");
  if (!std::regex_match(text, re))
    throw ArgumentError("--" + flag + ": '" + text + "' is not a decimal number");
  return std::stod(text);
}

long long parse_integer(const std::string& text, const std::string& flag) {
  static const std::regex re(R"([+-]?\d+)");
  if (!std::regex_match(text, re)) throw ArgumentError("--" + flag + ": '" + text + "' is not an integer");
  try {
    return std::stoll(text);
  } catch (const std::out_of_range&) {
    throw ArgumentError("--" + flag + ": '" + text + "' is out of range");
  }
}

std::vector<std::string> split(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  return parts;
}

std::vector<double> decimal_list(const std::string& text, const std::string& flag) {
  std::vector<double> out;
  for (const auto& p : split(text)) out.push_back(parse_decimal(p, flag));
  if (out.empty()) throw ArgumentError("--" + flag + ": empty list");
  return out;
}

std::vector<int> integer_list(const std::string& text, const std::string& flag) {
  std::vector<int> out;
  for (const auto& p : split(text)) {
    const long long v = parse_integer(p, flag);
    if (v < INT32_MIN || v > INT32_MAX) throw ArgumentError("--" + flag + ": value out of range");
    out.push_back(static_cast<int>(v));
  }
  if (out.empty()) throw ArgumentError("--" + flag + ": empty list");
  return out;
}

double need_decimal(const std::string& text, const std::string& flag) {
  if (text.empty()) throw ArgumentError("missing --" + flag);
  return parse_decimal(text, flag);
}

double opt_decimal(const std::string& text, const std::string& flag, double fallback) {
  return text.empty() ? fallback : parse_decimal(text, flag);
}

int need_int(const std::string& text, const std::string& flag) {
  if (text.empty()) throw ArgumentError("missing --" + flag);
  const auto v = integer_list(text, flag);
  if (v.size() != 1) throw ArgumentError("--" + flag + ": expected a single integer");
  return v[0];
}

int opt_int(const std::string& text, const std::string& flag, int fallback) {
  return text.empty() ? fallback : need_int(text, flag);
}

json complex_json(std::complex<double> z) { return json{{"re", z.real()}, {"im", z.imag()}}; }

// A symbol, the offset to use with it and a description of where both came from.
struct SymbolChoice {
  SymbolSpec sym;
  int offset;
  json params;
};

SymbolChoice symbol_from_flags(const Flags& f) {
  const Family fam = parse_family(f.family);
  json p{{"family", family_name(fam)}};
  switch (fam) {
    case Family::Exponential: {
      const double t = need_decimal(f.t, "t");
      const int off = opt_int(f.offset, "offset", opt_int(f.n, "n", 0));
      p["t"] = t;
      p["offset"] = off;
      return {make_exponential(t), off, p};
    }
    case Family::Growth: {
      const int m = need_int(f.m, "m");
      const double r = need_decimal(f.r, "r");
      if (!f.s.empty()) {
        const auto gp = make_growth_params(opt_decimal(f.alpha, "alpha", 1.0), r, m, need_decimal(f.s, "s"));
        p["alpha"] = gp.alpha;
        p["m"] = gp.m;
        p["r"] = gp.r;
        p["s"] = gp.s;
        p["n"] = gp.n;
        p["offset"] = gp.h;
        return {make_growth_symbol(gp.n, gp.m, gp.r), gp.h, p};
      }
      const int n = need_int(f.n, "n");
      const int off = opt_int(f.offset, "offset", 0);
      p["n"] = n;
      p["m"] = m;
      p["r"] = r;
      p["offset"] = off;
      return {make_growth_symbol(n, m, r), off, p};
    }
    case Family::Johansson: {
      const int M = need_int(f.m, "m"), N = need_int(f.n, "n");
      const double t = need_decimal(f.t, "t");
      const int off = opt_int(f.offset, "offset", 0);
      p["M"] = M;
      p["N"] = N;
      p["t"] = t;
      p["offset"] = off;
      return {make_johansson(M, N, t), off, p};
    }
    case Family::ConjectureProduct: {
      if (f.rs.empty() || f.ss.empty()) throw ArgumentError("conjecture family needs --rs and --ss");
      const auto r = decimal_list(f.rs, "rs"), s = decimal_list(f.ss, "ss");
      const int off = opt_int(f.offset, "offset", 0);
      p["rs"] = r;
      p["ss"] = s;
      p["offset"] = off;
      return {make_conjecture(r, s), off, p};
    }
  }
  throw ArgumentError("unknown family");
}

KernelMatrix kernel_from_flags(const Flags& f, SymbolChoice& sc) {
  const int size = opt_int(f.size, "size", 0);
  const double tol = opt_decimal(f.tol, "tol", 1e-12);
  if (size < 0) throw ArgumentError("--size must be >= 0");
  if (!(tol > 0.0)) throw ArgumentError("--tol must be > 0");
  sc.params["size"] = size > 0 ? json(size) : json("default");
  sc.params["tol"] = tol;
  return build_kernel(sc.sym, sc.offset, size, tol);
}

json kernel_convergence(const KernelMatrix& km) {
  return json{{"size", km.size},
              {"requested_size", km.requested_size},
              {"ksum_cut", km.ksum_cut},
              {"entry_error", km.entry_error},
              {"exact_section", km.exact_section},
              {"last_row_magnitude", km.size > 0 ? last_row_magnitude(km) : 0.0}};
}

std::string candidate_path(const Flags& f) {
  if (f.out.empty()) return "counterexample_candidates.jsonl";
  return (std::filesystem::path(f.out).parent_path() / "counterexample_candidates.jsonl").string();
}

void persist_candidate(const Flags& f, const json& record) {
  std::ofstream os(candidate_path(f), std::ios::app);
  os << record.dump() << '\n';
  os.flush();
  if (!os) throw std::runtime_error("could not write counterexample candidate file");
}

json spectrum_json(const SpectrumReport& rep) {
  json eig = json::array();
  for (auto z : rep.eigenvalues) eig.push_back(complex_json(z));
  json dets = json::array();
  for (auto [v, d] : rep.det_at_v) dets.push_back(json{{"v", v}, {"det", d}});
  return json{{"eigenvalues", eig},
              {"trace", rep.trace},
              {"det", dets},
              {"derivatives_at_1", rep.derivs},
              {"in_unit_interval", rep.in_unit_interval},
              {"lemma1_holds", rep.lemma1_holds},
              {"counterexample_candidate", rep.counterexample_candidate},
              {"flag_reason", rep.flag_reason}};
}

json spectrum_convergence(const SpectrumReport& rep) {
  return json{{"solver", rep.solver}, {"symmetrizer_residual", rep.symmetrizer_residual},
              {"max_imag", rep.max_imag}};
}

struct Record {
  json params = json::object();
  json convergence = json::object();
  json results = json::object();
  bool violation = false;
  std::string violation_reason;
};

Record cmd_coeffs(const Flags& f) {
  Record rec;
  auto sc = symbol_from_flags(f);
  const auto range = f.grid.empty() ? std::vector<int>{-10, 10} : integer_list(f.grid, "grid");
  if (range.size() != 2 || range[0] > range[1]) throw ArgumentError("--grid: expected lo,hi");
  std::optional<CoeffMethod> method;
  if (f.method == "closed") method = CoeffMethod::ClosedForm;
  else if (f.method == "series") method = CoeffMethod::SeriesConvolution;
  else if (f.method == "quadrature") method = CoeffMethod::CircleQuadrature;
  else if (!f.method.empty()) throw ArgumentError("--method: expected closed, series or quadrature");
  const double tol = opt_decimal(f.tol, "tol", 1e-10);
  const auto a = laurent_coeffs(sc.sym, Ratio::MinusOverPlus, range[0], range[1], method, tol);
  const auto b = laurent_coeffs(sc.sym, Ratio::PlusOverMinus, range[0], range[1], method, tol);
  rec.params = sc.params;
  rec.params["index_lo"] = range[0];
  rec.params["index_hi"] = range[1];
  rec.params["tol"] = tol;
  rec.convergence = json{{"method", method_name(a.method)},
                         {"minus_over_plus_error", a.tail_bound},
                         {"plus_over_minus_error", b.tail_bound}};
  json rows = json::array();
  for (int k = range[0]; k <= range[1]; ++k)
    rows.push_back(json{{"index", k}, {"minus_over_plus", a.at(k)}, {"plus_over_minus", b.at(k)}});
  rec.results["rows"] = rows;
  return rec;
}

Record cmd_kernel(const Flags& f) {
  Record rec;
  auto sc = symbol_from_flags(f);
  const auto km = kernel_from_flags(f, sc);
  rec.params = sc.params;
  rec.convergence = kernel_convergence(km);
  const auto sym = find_symmetrizer(km);
  rec.convergence["symmetrizable"] = sym.possible;
  rec.convergence["symmetrizer_residual"] = sym.residual;
  json rows = json::array();
  for (int a = 0; a < km.size; ++a)
    for (int b = 0; b < km.size; ++b)
      rows.push_back(json{{"i", km.offset + a}, {"j", km.offset + b}, {"value", km.entries(a, b)}});
  rec.results["rows"] = rows;
  return rec;
}

Record spectrum_record(const Flags& f, SymbolChoice sc) {
  Record rec;
  const auto km = kernel_from_flags(f, sc);
  SpectrumOptions opt;
  if (!f.v.empty()) opt.vs = decimal_list(f.v, "v");
  const auto rep = spectrum(km, opt);
  rec.params = sc.params;
  rec.params["v"] = opt.vs;
  rec.convergence = kernel_convergence(km);
  rec.convergence.update(spectrum_convergence(rep));
  rec.results = spectrum_json(rep);
  if (rep.counterexample_candidate) {
    // Confirm at twice the size before raising the flag.
    const int size2 = 2 * std::max(km.requested_size, default_kernel_size(sc.sym, sc.offset));
    const auto km2 = build_kernel(sc.sym, sc.offset, size2, km.tol);
    const auto rep2 = spectrum(km2, opt);
    rec.results["rerun_size"] = size2;
    rec.results["rerun_in_unit_interval"] = rep2.in_unit_interval;
    if (rep2.counterexample_candidate) {
      rec.violation = true;
      rec.violation_reason = rep2.flag_reason;
    }
  }
  return rec;
}

Record cmd_spectrum(const Flags& f) { return spectrum_record(f, symbol_from_flags(f)); }

Record cmd_conjecture(const Flags& f) {
  Flags g = f;
  g.family = "conjecture";
  return spectrum_record(g, symbol_from_flags(g));
}

Record cmd_det(const Flags& f) {
  Record rec;
  auto sc = symbol_from_flags(f);
  const auto km = kernel_from_flags(f, sc);
  const double v = opt_decimal(f.v, "v", 1.0);
  const auto d = fredholm_det(km, v);
  rec.params = sc.params;
  rec.params["v"] = v;
  rec.convergence = kernel_convergence(km);
  rec.convergence["stability_delta"] = d.stability_delta;
  rec.results["value"] = d.value;
  return rec;
}

Record cmd_trace(const Flags& f) {
  Record rec;
  auto sc = symbol_from_flags(f);
  const auto km = kernel_from_flags(f, sc);
  rec.params = sc.params;
  rec.convergence = kernel_convergence(km);
  rec.results["matrix_trace"] = trace(km);
  if (sc.sym.family() == Family::Exponential) {
    rec.results["bessel_trace"] = bessel_trace(sc.offset, sc.sym.as<ExponentialParams>().t);
  } else if (sc.sym.family() == Family::Growth) {
    const auto& gp = sc.sym.as<GrowthSymbolParams>();
    if (gp.r > 0.0 && gp.m <= 200) {
      const auto ct = trace_contour(gp.n, gp.m, gp.r, sc.offset);
      rec.results["contour_trace"] = ct.value;
      rec.convergence["contour_nodes"] = ct.nodes;
      rec.convergence["contour_refinement_delta"] = ct.refinement_delta;
      rec.convergence["contour_imag_residue"] = ct.imag_residue;
    }
  }
  return rec;
}

Record cmd_prop1(const Flags& f) {
  Record rec;
  const auto n_list = f.n.empty() ? std::vector<int>{10000} : integer_list(f.n, "n");
  const auto s_list = f.grid.empty() ? (f.s.empty() ? std::vector<double>{5, 8, 12, 16, 20} : decimal_list(f.s, "s"))
                                     : decimal_list(f.grid, "grid");
  const auto res = prop1_experiment(n_list, s_list, 0.5, 0.9, default_threads());
  rec.params = json{{"n", n_list}, {"s", s_list}, {"alpha1", res.alpha1}, {"alpha2", res.alpha2}};
  json rows = json::array();
  for (const auto& r : res.rows)
    rows.push_back(json{{"n", r.n}, {"s", r.s}, {"t", r.t}, {"trace", r.trace}, {"trace_over_t", r.trace_over_t},
                        {"band_lo", r.band_lo}, {"band_hi", r.band_hi}, {"band_sum_scaled", r.band_sum_scaled},
                        {"band_rms_scaled", r.band_rms_scaled}, {"certified_fraction", r.certified_fraction}});
  json fits = json::array();
  for (const auto& ft : res.fits)
    fits.push_back(json{{"n", ft.n}, {"slope", ft.slope}, {"intercept", ft.intercept}, {"points", ft.points}});
  rec.convergence = json{{"trace_tolerance", 1e-12}};
  rec.results = json{{"rows", rows}, {"fits", fits}};
  return rec;
}

Record cmd_growth(const Flags& f) {
  Record rec;
  const double alpha = opt_decimal(f.alpha, "alpha", 1.0);
  const auto gp = make_growth_params(alpha, need_decimal(f.r, "r"), need_int(f.m, "m"), need_decimal(f.s, "s"));
  rec.params = json{{"alpha", gp.alpha}, {"r", gp.r}, {"m", gp.m}, {"s", gp.s}};
  const auto cp = critical_points(gp.alpha, gp.r, gp.c_prime);
  const auto lt = leading_trace(gp);
  const auto km = build_kernel(make_growth_symbol(gp.n, gp.m, gp.r), gp.h);
  rec.results = json{{"n", gp.n},
                     {"c", gp.c},
                     {"c_prime_nominal", gp.c_prime_nominal},
                     {"h", gp.h},
                     {"c_prime", gp.c_prime},
                     {"u_plus", complex_json(cp.u_plus)},
                     {"u_minus", complex_json(cp.u_minus)},
                     {"discriminant", cp.discriminant},
                     {"leading_trace", lt.value},
                     {"leading_trace_endpoint", lt.endpoint_value},
                     {"matrix_trace", trace(km)},
                     {"det", fredholm_det_value(km)}};
  rec.convergence = kernel_convergence(km);
  rec.convergence["leading_quadrature_error"] = lt.quadrature_error;
  rec.convergence["leading_relative_difference"] = lt.relative_difference;
  if (gp.m <= 200) {
    const auto ct = trace_contour(gp);
    rec.results["contour_trace"] = ct.value;
    rec.convergence["contour_nodes"] = ct.nodes;
    rec.convergence["contour_refinement_delta"] = ct.refinement_delta;
  } else {
    rec.results["contour_trace"] = nullptr;
  }
  return rec;
}

Record cmd_lemma3(const Flags& f) {
  Record rec;
  const double alpha = opt_decimal(f.alpha, "alpha", 1.0);
  const double r = opt_decimal(f.r, "r", 0.3);
  const auto m_list = f.m.empty() ? std::vector<int>{200} : integer_list(f.m, "m");
  const auto s_list = !f.grid.empty() ? decimal_list(f.grid, "grid")
                                      : (f.s.empty() ? std::vector<double>{2, 3, 4, 6, 8} : decimal_list(f.s, "s"));
  const auto res = lemma3_experiment(alpha, r, m_list, s_list, 80, default_threads());
  rec.params = json{{"alpha", alpha}, {"r", r}, {"m", m_list}, {"s", s_list}};
  json rows = json::array();
  for (const auto& row : res.rows)
    rows.push_back(json{{"m", row.m}, {"s", row.s}, {"h", row.h}, {"c_prime", row.c_prime},
                        {"s_effective", row.s_effective}, {"trace_matrix", row.trace_matrix},
                        {"trace_contour", std::isnan(row.trace_contour) ? json(nullptr) : json(row.trace_contour)},
                        {"leading", row.leading}, {"det", row.det}, {"exp_minus_trace", row.exp_minus_trace},
                        {"lemma1_holds", row.lemma1_holds}});
  rec.convergence = json{{"contour_max_m", 80}};
  rec.results = json{{"rows", rows}, {"det_monotone", res.det_monotone}, {"lemma1_all", res.lemma1_all}};
  if (!res.lemma1_all) {
    rec.violation = true;
    rec.violation_reason = "det(I - K) above exp(-tr K)";
  }
  return rec;
}

Record cmd_mc(const Flags& f) {
  Record rec;
  const double t = need_decimal(f.t, "t");
  const auto window = f.grid.empty() ? std::vector<int>{2, 8} : integer_list(f.grid, "grid");
  if (window.size() != 2) throw ArgumentError("--grid: expected the n window lo,hi");
  const int samples = opt_int(f.samples, "samples", 100000);
  const long long seed = f.seed.empty() ? 1 : parse_integer(f.seed, "seed");
  if (seed < 0) throw ArgumentError("--seed must be >= 0");
  std::vector<int> offsets{-1, 0, 1};
  if (!f.offset.empty()) offsets = integer_list(f.offset, "offset");
  const auto rep = compare_with_det(t, window[0], window[1], samples, static_cast<std::uint64_t>(seed), offsets,
                                    default_threads());
  rec.params = json{{"t", t}, {"n_lo", window[0]}, {"n_hi", window[1]}, {"samples", samples}, {"seed", seed},
                    {"offsets", offsets}};
  json rows = json::array();
  for (const auto& row : rep.rows) {
    json r{{"n", row.n}, {"p_hat", row.p_hat}, {"std_error", row.std_error}};
    for (std::size_t k = 0; k < offsets.size(); ++k) {
      r["det_offset_" + std::to_string(offsets[k])] = row.det[k];
      r["z_offset_" + std::to_string(offsets[k])] = row.z[k];
    }
    rows.push_back(r);
  }
  rec.convergence = json{{"z_threshold", 4.0}, {"determinant_tolerance", 1e-14}};
  rec.results = json{{"rows", rows},
                     {"consistent_offsets", rep.consistent},
                     {"unique", rep.unique},
                     {"chosen_offset", rep.chosen_offset},
                     {"monotone", rep.monotone},
                     {"max_abs_diff", rep.max_abs_diff}};
  return rec;
}

Record cmd_twlimit(const Flags& f) {
  Record rec;
  const auto xs = f.grid.empty() ? std::vector<double>{-1, 0, 1} : decimal_list(f.grid, "grid");
  json rows = json::array();
  if (f.family == "growth") {
    const double alpha = opt_decimal(f.alpha, "alpha", 1.0);
    const double r = opt_decimal(f.r, "r", 0.3);
    const auto m_list = f.m.empty() ? std::vector<int>{50, 100, 200} : integer_list(f.m, "m");
    rec.params = json{{"family", "growth"}, {"alpha", alpha}, {"r", r}, {"m", m_list}, {"x", xs}};
    json fits = json::array();
    for (double x : xs) {
      const auto scan = growth_limit_scan(x, alpha, r, m_list, default_threads());
      fits.push_back(json{{"x", x}, {"sigma_g", scan.sigma_g}, {"fit_m", scan.fit_m}});
      for (const auto& row : scan.rows)
        rows.push_back(json{{"x", x}, {"m", row.m}, {"h", row.h}, {"x_effective", row.x_effective},
                            {"det", row.det}, {"f2", row.f2}, {"deviation", row.deviation}});
    }
    rec.results = json{{"rows", rows}, {"scale_fits", fits}};
  } else {
    const auto ts = f.t.empty() ? std::vector<double>{20, 50, 100} : decimal_list(f.t, "t");
    rec.params = json{{"family", "exp"}, {"t", ts}, {"x", xs}};
    json f2 = json::array();
    for (double x : xs) {
      const auto ad = airy_kernel_det(x, 80);
      f2.push_back(json{{"x", x}, {"f2", ad.value}, {"order", ad.order}, {"convergence_delta", ad.convergence_delta}});
      for (const auto& row : plancherel_limit_scan(x, ts, default_threads()))
        rows.push_back(json{{"x", x}, {"t", row.t}, {"n", row.n}, {"t_centered", row.t_centered}, {"det", row.det},
                            {"det_uncentered", row.det_uncentered}, {"f2", row.f2}, {"deviation", row.deviation},
                            {"deviation_uncentered", row.deviation_uncentered},
                            {"stability_delta", row.stability_delta}});
    }
    rec.convergence = json{{"airy", f2}};
    rec.results = json{{"rows", rows}};
  }
  return rec;
}

Record cmd_accept(const Flags& f) {
  Record rec;
  AcceptanceOptions opt;
  opt.threads = default_threads();
  opt.candidate_path = candidate_path(f);
  opt.log = &std::cerr;
  if (!f.grid.empty()) opt.only = integer_list(f.grid, "grid");
  const auto results = run_acceptance(opt);
  json rows = json::array();
  int failed = 0;
  for (const auto& r : results) {
    std::cerr << format_result(r) << '\n';
    rows.push_back(json{{"id", r.id}, {"name", r.name}, {"pass", r.pass}, {"detail", r.detail}});
    if (!r.pass) ++failed;
  }
  rec.params = json{{"criteria", opt.only}};
  rec.results = json{{"rows", rows}, {"failed", failed}};
  if (failed) {
    rec.violation = true;
    rec.violation_reason = std::to_string(failed) + " acceptance criteria failed";
  }
  return rec;
}

std::string csv_cell(const json& v) {
  if (v.is_string()) {
    std::string s = v.get<std::string>();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
  }
  if (v.is_null()) return "";
  if (v.is_object() && v.contains("re") && v.contains("im"))
    return csv_cell(v["re"]) + (v["im"].get<double>() < 0 ? "" : "+") + csv_cell(v["im"]) + "i";
  if (v.is_array() || v.is_object()) return csv_cell(json(v.dump()));
  return v.dump();
}

// Tidy CSV: one line per entry of results.rows, or a single line of scalars.
std::string to_csv(const json& results) {
  std::vector<json> rows;
  if (results.contains("rows") && results["rows"].is_array()) {
    for (const auto& r : results["rows"]) rows.push_back(r);
  } else if (results.contains("eigenvalues")) {
    int idx = 0;
    for (const auto& z : results["eigenvalues"])
      rows.push_back(json{{"index", idx++}, {"re", z["re"]}, {"im", z["im"]}});
  } else {
    rows.push_back(results);
  }
  std::vector<std::string> header;
  for (const auto& r : rows)
    for (const auto& [k, v] : r.items())
      if (std::find(header.begin(), header.end(), k) == header.end()) header.push_back(k);
  std::string out;
  for (std::size_t i = 0; i < header.size(); ++i) out += (i ? "," : "") + header[i];
  out += '\n';
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (i) out += ',';
      if (r.contains(header[i])) out += csv_cell(r[header[i]]);
    }
    out += '\n';
  }
  return out;
}

void write_atomically(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::cout << text << std::flush;
    return;
  }
  const std::string tmp = path + ".tmp." + std::to_string(::getpid());
  {
    std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
    os << text;
    os.flush();
    if (!os) throw std::runtime_error("could not write " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Fredholm determinants of Wiener-Hopf kernels: experiments and checks"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kVersion);
  Flags f;

  const std::vector<std::pair<std::string, std::string>> commands{
      {"coeffs", "Laurent coefficients of phi_-/phi_+ and phi_+/phi_- (--grid lo,hi)"},
      {"kernel", "finite section of the kernel"},
      {"spectrum", "eigenvalues, determinants, v-derivatives"},
      {"det", "det(I - vK)"},
      {"trace", "kernel trace (and Bessel / contour forms)"},
      {"prop1", "exponential-kernel trace scaling sweep"},
      {"growth", "growth-model analytics at (alpha, r, m, s)"},
      {"lemma3", "growth trace and determinant sweep over m and s"},
      {"conjecture", "spectrum of a product symbol (--rs, --ss)"},
      {"mc", "Monte Carlo LIS vs determinant (--grid n_lo,n_hi)"},
      {"twlimit", "edge scaling against F_2 (--grid x-list)"},
      {"accept", "run the acceptance suite"}};

  for (const auto& [name, help] : commands) {
    auto* sub = app.add_subcommand(name, help);
    sub->add_option("--family", f.family, "exp | growth | johansson | conjecture");
    sub->add_option("--t", f.t, "exponential / Johansson parameter (list for twlimit)");
    sub->add_option("--n", f.n, "offset (exp), n (growth), N (johansson), n list (prop1)");
    sub->add_option("--m", f.m, "m (growth), M (johansson), m list (lemma3, twlimit)");
    sub->add_option("--alpha", f.alpha, "n / m in the growth model");
    sub->add_option("--r", f.r, "growth parameter r in [0, 1)");
    sub->add_option("--s", f.s, "growth shift s (list for lemma3, prop1)");
    sub->add_option("--v", f.v, "determinant parameter (list for spectrum)");
    sub->add_option("--size", f.size, "truncation size (0 = family default)");
    sub->add_option("--tol", f.tol, "tolerance");
    sub->add_option("--seed", f.seed, "Monte Carlo seed");
    sub->add_option("--samples", f.samples, "Monte Carlo sample count");
    sub->add_option("--rs", f.rs, "comma list r_i");
    sub->add_option("--ss", f.ss, "comma list s_j");
    sub->add_option("--offset", f.offset, "first index of the l^2 space (list for mc)");
    sub->add_option("--grid", f.grid, "comma list for sweeps");
    sub->add_option("--method", f.method, "coefficients: closed | series | quadrature");
    sub->add_option("--format", f.format, "json | csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--out", f.out, "output path (default stdout)");
    sub->add_option("--threads", f.threads, "worker threads (default FREDHOLM_LAB_THREADS)");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kArgument;
  }

  const std::string cmd = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    if (!f.threads.empty()) {
      const int th = need_int(f.threads, "threads");
      if (th < 1) throw ArgumentError("--threads must be >= 1");
      set_default_threads(th);
    }
    Record rec;
    if (cmd == "coeffs") rec = cmd_coeffs(f);
    else if (cmd == "kernel") rec = cmd_kernel(f);
    else if (cmd == "spectrum") rec = cmd_spectrum(f);
    else if (cmd == "det") rec = cmd_det(f);
    else if (cmd == "trace") rec = cmd_trace(f);
    else if (cmd == "prop1") rec = cmd_prop1(f);
    else if (cmd == "growth") rec = cmd_growth(f);
    else if (cmd == "lemma3") rec = cmd_lemma3(f);
    else if (cmd == "conjecture") rec = cmd_conjecture(f);
    else if (cmd == "mc") rec = cmd_mc(f);
    else if (cmd == "twlimit") rec = cmd_twlimit(f);
    else rec = cmd_accept(f);

    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    json record{{"meta", {{"tool", "fredholm_lab"},
                          {"version", kVersion},
                          {"command", cmd},
                          {"threads", default_threads()},
                          {"wall_seconds", wall}}},
                {"params", rec.params},
                {"convergence", rec.convergence},
                {"results", rec.results}};
    if (rec.violation) {
      persist_candidate(f, json{{"command", cmd}, {"params", rec.params}, {"reason", rec.violation_reason},
                                {"results", rec.results}});
    }
    write_atomically(f.out, f.format == "csv" ? to_csv(rec.results) : record.dump(2) + "\n");
    if (rec.violation) {
      std::cerr << "property violation: " << rec.violation_reason << " (recorded in " << candidate_path(f) << ")\n";
      return kViolation;
    }
    return kOk;
  } catch (const ArgumentError& e) {
    std::cerr << "argument error: " << e.what() << '\n';
    return kArgument;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence failure: " << e.what() << '\n';
    return kConvergence;
  } catch (const PreconditionError& e) {
    std::cerr << "property violation: " << e.what() << '\n';
    return kViolation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kConvergence;
  }
}

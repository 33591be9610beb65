// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <sstream>

#include <json.hpp>

#include "ff/cartan.hpp"
#include "ff/cli.hpp"
#include "ff/curvature.hpp"
#include "ff/fixtures.hpp"
#include "ff/immersion.hpp"
#include "ff/io.hpp"
#include "ff/rigidity.hpp"

using namespace ff;
namespace fs = std::filesystem;
using json = nlohmann::json;
using M = MatrixX<double>;
using V = VectorX<double>;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

const fs::path& workdir() {
  static const fs::path dir = [] {
    const fs::path d = fs::temp_directory_path() / "ff_acceptance";
    fs::remove_all(d);
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

int run_ff(std::vector<std::string> args) {
  args.insert(args.begin(), "ff");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  return cli::run(static_cast<int>(argv.size()), argv.data());
}

json read_json(const fs::path& path) {
  std::ifstream is(path);
  return json::parse(is);
}

std::string slurp(const fs::path& path) {
  std::ifstream is(path, std::ios::binary);
  std::ostringstream s;
  s << is.rdbuf();
  return s.str();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

/// Observed order between successive halvings of h; values at rounding level
/// count as converged.
bool orders_at_least(const std::vector<double>& e, double order, double floor, std::string& detail) {
  bool ok = true;
  for (std::size_t i = 1; i < e.size(); ++i) {
    if (e[i] <= floor && e[i - 1] <= floor) {
      detail += " (rounding)";
      continue;
    }
    const double o = std::log2(e[i - 1] / e[i]);
    detail += fmt(" %.2f", o);
    ok = ok && o >= order;
  }
  return ok;
}

std::vector<double> powers_of_half(int from, int to) {
  std::vector<double> v;
  for (int k = from; k <= to; ++k) v.push_back(std::ldexp(1.0, -k));
  return v;
}

Outcome round_trip() {
  Outcome out{true, ""};
  double sphere65 = 0;
  for (const auto& name : fixtures::surface_names()) {
    const auto start = std::chrono::steady_clock::now();
    std::vector<double> dist;
    for (const int n : {17, 33, 65}) {
      const fs::path dir = workdir() / "round_trip" / (name + std::to_string(n));
      const auto s = [&](const char* sub, const char* file) { return (dir / sub / file).string(); };
      int status = run_ff({"fixture", "--set", "name=\"" + name + "\"", "--set", "n=" + std::to_string(n),
                           "--output-dir", (dir / "fx").string()});
      status |= run_ff({"forms", "-i", s("fx", "immersion.json"), "--output-dir", (dir / "forms").string()});
      status |= run_ff({"reconstruct", "-i", s("forms", "g.json"), "-i", s("forms", "B.json"), "-i",
                        s("forms", "N.json"), "--output-dir", (dir / "rec").string()});
      status |= run_ff({"align", "-i", s("rec", "f.json"), "-i", s("fx", "immersion.json"), "--output-dir",
                        (dir / "align").string()});
      if (status != 0) return {false, name + ": pipeline exited nonzero at n = " + std::to_string(n)};
      dist.push_back(read_json(dir / "align" / "motion.json")["quotient_distance_2"].get<double>());
    }
    const double seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::string orders;
    const bool ok = orders_at_least(dist, 1.8, 1e-12, orders);
    out.detail += fmt("%s orders%s, %.2fs; ", name.c_str(), orders.c_str(), seconds);
    out.pass = out.pass && ok && seconds < 10;
    if (name == "sphere_cap") sphere65 = dist.back();
  }
  out.detail += fmt("sphere_cap at n=65: %.3g (<= 1e-3)", sphere65);
  out.pass = out.pass && sphere65 <= 1e-3;
  return out;
}

double fixture_holonomy(const std::string& name, int n, double scale = 1) {
  const auto forms = fundamental_forms(fixtures::surface(name, n));
  const SecondFormField<double> B(scale * forms.B.field());
  return holonomy_defect(connection_form(forms.g, B, forms.N));
}

Outcome integrability() {
  Outcome out{true, ""};
  for (const auto& name : fixtures::surface_names()) {
    std::vector<double> d;
    for (const int n : {17, 33, 65}) d.push_back(fixture_holonomy(name, n));
    std::string orders;
    out.pass = orders_at_least(d, 2.8, 1e-11, orders) && out.pass;
    out.detail += name + " orders" + orders + "; ";
  }
  const double base = fixture_holonomy("sphere_cap", 33, 1.05);
  out.detail += "growth/linear";
  for (const double delta : {0.1, 0.2}) {
    const double rel = fixture_holonomy("sphere_cap", 33, 1 + delta) / base / (delta / 0.05);
    out.detail += fmt(" %.3f", rel);
    out.pass = out.pass && std::abs(rel - 1) <= 0.2;
  }
  return out;
}

Outcome gcr_suite() {
  Outcome out{true, ""};
  for (const auto& name : fixtures::surface_names()) {
    std::vector<double> r;
    for (const int n : {17, 33, 65}) {
      const auto forms = fundamental_forms(fixtures::surface(name, n));
      r.push_back(std::max(gauss_residual(forms.g, forms.B, 4.0), codazzi_residual(forms.g, forms.B, forms.N, 4.0)));
    }
    std::string orders;
    out.pass = orders_at_least(r, 1.8, 1e-9, orders) && out.pass;
    out.detail += name + " orders" + orders + "; ";
  }
  const Chart<double> chart(2, 1, {{0, 1}, {0, 1}}, {9, 9});
  const MetricField<double> g(sample(chart, {2, 2}, [](const V&) { return M(M::Identity(2, 2)); }));
  const SecondFormField<double> B(sample(chart, {1, 2, 2}, [](const V&) { return M(M::Identity(2, 2)); }));
  const auto res = gauss_residual_field(g, B);
  double worst = 0;
  // Component (1,2,1,2) in one-based indices.
  for (Index p = 0; p < chart.num_points(); ++p) worst = std::max(worst, std::abs(res(p, 0 * 8 + 1 * 4 + 0 * 2 + 1) - 1));
  out.detail += fmt("flat g, B = I: |R_1212 residual - 1| = %.2g", worst);
  out.pass = out.pass && worst <= 1e-12;
  return out;
}

Outcome lipschitz() {
  const fs::path dir = workdir() / "depend";
  json s = json::array();
  for (const double v : powers_of_half(2, 7)) s.push_back(v);
  if (run_ff({"depend", "--set", "family=\"sphere_radius\"", "--set", "s=" + s.dump(), "--output-dir",
              dir.string()}) != 0)
    return {false, "depend exited nonzero"};
  const json sum = read_json(dir / "summary.json");
  const double slope = sum["slope"], ratio = sum["ratio_spread"], pfaff = sum["pfaff_spread"];
  return {std::abs(slope - 1) <= 0.15 && ratio < 3 && pfaff < 3 && sum["all_compatible"] == true,
          fmt("slope %.3f, ratio spread %.3f, Pfaff spread %.3f", slope, ratio, pfaff)};
}

Outcome rigidity() {
  const fs::path dir = workdir() / "rigidity";
  json t = json::array();
  for (const double v : powers_of_half(3, 8)) t.push_back(v);
  if (run_ff({"rigidity", "--set", "t=" + t.dump(), "--seed", "7", "--output-dir", dir.string()}) != 0)
    return {false, "rigidity exited nonzero"};
  const json sum = read_json(dir / "summary.json");
  const double ds = sum["defect_slope"], ls = sum["lhs_slope"], sp = sum["ratio_spread"];
  return {std::abs(ds - 1) <= 0.1 && std::abs(ls - 1) <= 0.1 && sp < 10 && sum["all_beat_random"] == true,
          fmt("defect slope %.4f, lhs slope %.4f, ratio spread %.4f, beats 20 random: %s", ds, ls, sp,
              sum["all_beat_random"] == true ? "yes" : "no")};
}

Outcome cofactor_piola() {
  PerturbedRotationFamily<double> fam;
  fam.resolution = 33;
  const auto g = fam.metric();
  double worst = 0;
  for (const M& Q : {M(M::Identity(3, 3)), M(Eigen::AngleAxisd(0.7, Eigen::Vector3d(1, -2, 0.5).normalized())
                                                 .toRotationMatrix())}) {
    auto rotated = fam;
    rotated.base_rotation = Q;
    const auto f = rotated.map(0.0);
    const auto df = rotated.map_differential(0.0);
    worst = std::max(worst, (riemannian_cofactor(df, g, f).values() - df.values()).cwiseAbs().maxCoeff());
  }
  std::vector<double> r;
  for (const int n : {17, 33, 65}) {
    PerturbedRotationFamily<double> f;
    f.resolution = n;
    r.push_back(piola_residual(SphereMap<double>(f.reference().field()), f.metric()));
  }
  std::string orders;
  const bool ok = orders_at_least(r, 0.9, 0.0, orders);
  return {worst <= 1e-10 && ok && r[2] < r[1],
          fmt("|cof(df) - df| = %.2g; Piola orders", worst) + orders};
}

Outcome asymptotic() {
  const fs::path dir = workdir() / "converge";
  json eps = json::array();
  for (const double v : powers_of_half(2, 6)) eps.push_back(v);
  if (run_ff({"converge", "--set", "generator=\"wrinkles\"", "--set", "eps=" + eps.dump(), "--dict-size", "4",
              "--output-dir", dir.string()}) != 0)
    return {false, "converge exited nonzero"};
  const json sum = read_json(dir / "summary.json");
  const double slope = sum["metric_gap_slope"], rate = sum["metric_rate"];
  bool ok = slope > 0 && std::abs(slope / rate - 1) <= 0.2;
  bool j_ok = sum["j_sum_slope"].is_number() && sum["j_sum_slope"].get<double>() > 0;
  for (const auto& s : sum["j_slopes"]) j_ok = j_ok && s.is_number() && s.get<double>() > 0;
  const double min_ratio = sum["min_delta_ratio"];

  // Strong distances from the CSV: the last must stay above 0.1x the first.
  std::istringstream csv(slurp(dir / "converge.csv"));
  std::string line;
  std::getline(csv, line);
  std::vector<std::string> header;
  for (std::istringstream h(line); std::getline(h, line, ',');) header.push_back(line);
  const auto col = std::find(header.begin(), header.end(), "strong_distance") - header.begin();
  std::vector<double> strong;
  while (std::getline(csv, line)) {
    std::istringstream row(line);
    std::string cell;
    for (long c = 0; c <= col; ++c) std::getline(row, cell, ',');
    if (!cell.empty() && cell != "nan") strong.push_back(std::stod(cell));
  }
  const bool weak_not_strong = !strong.empty() && strong.back() > 0.1 * strong.front() && sum["weak_not_strong"] == true;
  const bool gauss = sum["gauss_ok"] == true;
  return {ok && j_ok && min_ratio >= 1.5 && weak_not_strong && gauss,
          fmt("(a) gap slope %.3f vs rate %.1f; (b) J-sum slope %.3f, all J slopes > 0: %s; (c) min delta ratio "
              "%.2f, strong %.3g -> %.3g; (d) gauss %.2g <= %.3g",
              slope, rate, sum["j_sum_slope"].get<double>(), j_ok ? "yes" : "no", min_ratio, strong.front(),
              strong.back(), sum["gauss"].get<double>(), sum["threshold"].get<double>())};
}

Outcome determinism() {
  const std::vector<std::vector<std::string>> runs{
      {"rigidity", "--seed", "3", "--set", "resolution=33"},
      {"depend", "--seed", "3", "--set", "family=\"graph_amplitude\"", "--set", "resolution=17"},
      {"converge", "--set", "eps=[0.25, 0.125, 0.0625]", "--set", "resolution=[129, 17]"}};
  const std::vector<std::string> csvs{"rigidity.csv", "depend.csv", "converge.csv"};
  std::string detail;
  bool ok = true;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    std::vector<fs::path> dirs;
    for (const char* tag : {"a", "b"}) {
      dirs.push_back(workdir() / "determinism" / (runs[i][0] + tag));
      auto args = runs[i];
      args.insert(args.end(), {"--output-dir", dirs.back().string()});
      ok = run_ff(args) == 0 && ok;
    }
    const bool same_manifest = slurp(dirs[0] / "manifest.json") == slurp(dirs[1] / "manifest.json");
    const bool same_csv = slurp(dirs[0] / csvs[i]) == slurp(dirs[1] / csvs[i]) && !slurp(dirs[0] / csvs[i]).empty();
    ok = ok && same_manifest && same_csv;
    detail += runs[i][0] + (same_manifest && same_csv ? ": identical; " : ": differs; ");
  }
  return {ok, detail};
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> criteria{
      {"round-trip reconstruction", round_trip},  {"integrability certificate", integrability},
      {"GCR residual suite", gcr_suite},          {"Lipschitz dependence", lipschitz},
      {"geometric rigidity", rigidity},           {"cofactor and Piola identity", cofactor_piola},
      {"asymptotic rigidity", asymptotic},        {"determinism", determinism}};
  std::vector<std::string> lines;
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    lines.push_back(fmt("criterion %zu %s %s: ", i + 1, o.pass ? "PASS" : "FAIL", criteria[i].first) + o.detail);
  }
  // Subcommands print their diagnostics to stderr; keep the summary together.
  for (const auto& l : lines) std::printf("%s\n", l.c_str());
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}

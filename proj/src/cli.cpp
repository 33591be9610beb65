#include "ff/cli.hpp"

#include <openssl/evp.h>

#include <CLI11.hpp>

#include <array>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <set>
#include <sstream>

#include "ff/asymptotics.hpp"
#include "ff/cartan.hpp"
#include "ff/curvature.hpp"
#include "ff/fixtures.hpp"
#include "ff/immersion.hpp"
#include "ff/io.hpp"
#include "ff/rigidity.hpp"
#include "ff/stability.hpp"

namespace ff::cli {

namespace fs = std::filesystem;
using json = nlohmann::json;
using V = VectorX<double>;
using M = MatrixX<double>;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

const std::map<std::string, std::set<std::string>>& allowed_params() {
  static const std::map<std::string, std::set<std::string>> keys{
      {"fixture", {"name", "n"}},
      {"forms", {}},
      {"check-gcr", {}},
      {"reconstruct", {"A0", "f0"}},
      {"align", {}},
      {"rigidity", {"base_rotation", "amplitude", "direction", "resolution", "t", "random_rotations"}},
      {"depend", {"family", "s", "resolution"}},
      {"converge", {"generator", "eps", "resolution", "j_dict_size", "r"}},
  };
  return keys;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, s.find_last_not_of(" \t\r") - b + 1);
}

json parse_value(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::exception&) {
    return json(text);
  }
}

std::string normalise_key(std::string key) {
  for (auto& c : key)
    if (c == '-') c = '_';
  return key;
}

template <typename T>
T param(const RunConfig& config, const std::string& key, T fallback) {
  if (!config.params.contains(key)) return fallback;
  try {
    return config.params.at(key).get<T>();
  } catch (const json::exception&) {
    throw ValidationError("parameter '" + key + "' has the wrong type");
  }
}

M matrix_from_json(const json& j, Index rows, Index cols, const std::string& what) {
  try {
    require(j.is_array() && Index(j.size()) == rows, what + ": expected " + std::to_string(rows) + " rows");
    M m(rows, cols);
    for (Index r = 0; r < rows; ++r) {
      require(j[r].is_array() && Index(j[r].size()) == cols, what + ": expected " + std::to_string(cols) + " columns");
      for (Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
    }
    return m;
  } catch (const json::exception&) {
    throw ValidationError(what + ": entries must be numbers");
  }
}

V vector_from_json(const json& j, Index size, const std::string& what) {
  try {
    require(j.is_array() && Index(j.size()) == size, what + ": expected " + std::to_string(size) + " entries");
    V v(size);
    for (Index i = 0; i < size; ++i) v[i] = j[i].get<double>();
    return v;
  } catch (const json::exception&) {
    throw ValidationError(what + ": entries must be numbers");
  }
}

json matrix_json(const M& m) {
  json out = json::array();
  for (Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    out.push_back(row);
  }
  return out;
}

json vector_json(const V& v) { return std::vector<double>(v.data(), v.data() + v.size()); }

json report_json(const ResidualReport& r) {
  return {{"gauss", r.gauss},         {"codazzi", r.codazzi},     {"ricci", r.ricci},
          {"norm_kind", r.norm_kind}, {"p", r.p},                 {"threshold", r.threshold},
          {"compatible", r.compatible}, {"flags", r.flags}};
}

std::vector<double> halvings(int from, int to) {
  std::vector<double> out;
  for (int k = from; k <= to; ++k) out.push_back(std::ldexp(1.0, -k));
  return out;
}

/// Slope of log y against log x, NaN unless every entry is positive.
double slope_or_nan(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() < 2) return kNaN;
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] > 0 && y[i] > 0)) return kNaN;
  return loglog_slope(x, y);
}

double spread(const std::vector<double>& v) {
  double lo = std::numeric_limits<double>::infinity(), hi = 0;
  for (double x : v)
    if (std::isfinite(x)) lo = std::min(lo, x), hi = std::max(hi, x);
  return hi > 0 ? hi / lo : kNaN;
}

void require_inputs(const RunConfig& config, std::size_t lo, std::size_t hi, const std::string& usage) {
  require(config.inputs.size() >= lo && config.inputs.size() <= hi,
          config.subcommand + ": expected " + usage + " (got " + std::to_string(config.inputs.size()) + " inputs)");
}

Field<double> load(const fs::path& path, const std::string& kind) {
  const std::string found = io::read_kind(path);
  if (!found.empty() && found != kind)
    throw ValidationError(path.string() + " holds a '" + found + "' field, expected '" + kind + "'");
  return io::read_field(path);
}

/// Collects the files a run writes and emits the manifest last.
class Artifacts {
 public:
  explicit Artifacts(const RunConfig& config) : config_(config) { fs::create_directories(config.output_dir); }

  void field(const Field<double>& f, const std::string& stem, const std::string& kind) {
    io::write_field(f, config_.output_dir / stem, kind);
    files_.push_back(stem + ".json");
    files_.push_back(stem + ".bin");
  }

  void json_file(const std::string& name, const json& j) {
    std::ofstream os(config_.output_dir / name);
    if (!os) throw ValidationError("cannot write " + (config_.output_dir / name).string());
    os << j.dump(2) << "\n";
    files_.push_back(name);
  }

  void csv(const std::string& name, const std::vector<std::string>& header,
           const std::vector<std::vector<double>>& rows) {
    std::ofstream os(config_.output_dir / name);
    if (!os) throw ValidationError("cannot write " + (config_.output_dir / name).string());
    for (std::size_t c = 0; c < header.size(); ++c) os << (c ? "," : "") << header[c];
    os << "\n";
    for (const auto& row : rows) {
      for (std::size_t c = 0; c < row.size(); ++c) os << (c ? "," : "") << io::format_double(row[c]);
      os << "\n";
    }
    files_.push_back(name);
  }

  int finish(int status) {
    json inputs = json::array();
    for (const auto& in : config_.inputs) {
      json entry = {{"path", in.string()}, {"sha256", sha256_file(in)}};
      if (in.extension() == ".json") {
        std::ifstream is(in);
        const json h = json::parse(is, nullptr, false);
        if (h.is_object() && h.contains("payload") && h["payload"].is_string())
          entry["payload_sha256"] = sha256_file(in.parent_path() / h["payload"].get<std::string>());
      }
      inputs.push_back(entry);
    }
    json outputs = json::array();
    for (const auto& f : files_) outputs.push_back({{"file", f}, {"sha256", sha256_file(config_.output_dir / f)}});
    const json manifest = {
        {"program", "ff"},
        {"version", kVersion},
        {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
                      std::to_string(EIGEN_MINOR_VERSION)},
        {"compiler", __VERSION__},
        {"subcommand", config_.subcommand},
        {"seed", config_.seed},
        {"parameters",
         {{"p", config_.p},
          {"tol", config_.tol},
          {"dict_size", config_.dict_size},
          {"force", config_.force},
          {"params", config_.params}}},
        {"inputs", inputs},
        {"outputs", outputs},
        {"exit_status", status}};
    std::ofstream os(config_.output_dir / "manifest.json");
    if (!os) throw ValidationError("cannot write manifest in " + config_.output_dir.string());
    os << manifest.dump(2) << "\n";
    return status;
  }

 private:
  const RunConfig& config_;
  std::vector<std::string> files_;
};

}  // namespace

const std::vector<std::string>& subcommands() {
  static const std::vector<std::string> names{"reconstruct", "forms",  "check-gcr", "align",
                                              "rigidity",    "depend", "converge",  "fixture"};
  return names;
}

json read_config_file(const fs::path& path) {
  std::ifstream is(path);
  if (!is) throw ValidationError("cannot open config file " + path.string());
  json out = json::object();
  std::string line;
  int number = 0;
  while (std::getline(is, line)) {
    ++number;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path.string() + ":" + std::to_string(number) + ": expected key = value");
    const std::string key = normalise_key(trim(t.substr(0, eq)));
    require(!key.empty(), path.string() + ":" + std::to_string(number) + ": empty key");
    out[key] = parse_value(trim(t.substr(eq + 1)));
  }
  return out;
}

void apply_settings(RunConfig& config, const json& settings) {
  require(settings.is_object(), "settings must be a JSON object");
  try {
    for (const auto& [raw, value] : settings.items()) {
      const std::string key = normalise_key(raw);
      if (key == "p") {
        config.p = value.get<double>();
      } else if (key == "tol") {
        config.tol = value.get<double>();
      } else if (key == "dict_size") {
        config.dict_size = value.get<int>();
      } else if (key == "seed") {
        config.seed = value.get<std::uint64_t>();
      } else if (key == "force") {
        config.force = value.get<bool>();
      } else if (key == "output_dir") {
        config.output_dir = value.get<std::string>();
      } else if (key == "inputs") {
        for (const auto& in : value) config.inputs.emplace_back(in.get<std::string>());
      } else {
        config.params[key] = value;
      }
    }
  } catch (const json::exception& e) {
    throw ValidationError(std::string("setting has the wrong type: ") + e.what());
  }
}

std::string sha256_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot read " + path.string());
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1)
    throw NumericalError("sha256: digest initialisation failed");
  std::array<char, 1 << 16> buf;
  while (in.read(buf.data(), buf.size()) || in.gcount() > 0)
    EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(in.gcount()));
  std::array<unsigned char, EVP_MAX_MD_SIZE> md;
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::ostringstream hex;
  for (unsigned int i = 0; i < len; ++i) {
    constexpr const char* digits = "0123456789abcdef";
    hex << digits[md[i] >> 4] << digits[md[i] & 15];
  }
  return hex.str();
}

int run_fixture(const RunConfig& config) {
  require_inputs(config, 0, 0, "no inputs");
  const auto name = param<std::string>(config, "name", "sphere_cap");
  const int n = param<int>(config, "n", 33);
  Artifacts out(config);
  out.field(fixtures::surface(name, n), "immersion", "immersion");
  return out.finish(0);
}

int run_forms(const RunConfig& config) {
  require_inputs(config, 1, 1, "one immersion file");
  const ImmersionField<double> f(load(config.inputs[0], "immersion"));
  const auto forms = fundamental_forms(f);
  double min_det = std::numeric_limits<double>::infinity();
  for (Index p = 0; p < forms.g.num_points(); ++p) min_det = std::min(min_det, forms.g.at(p).determinant());
  const auto gcr = gcr_residuals(forms.g, forms.B, forms.N, config.p, config.tol);
  Artifacts out(config);
  out.field(forms.g, "g", "metric");
  out.field(forms.B, "B", "second_form");
  out.field(forms.N, "N", "normal_connection");
  out.json_file("forms.json", {{"asymmetry", forms.asymmetry},
                               {"normal_asymmetry", forms.normal_asymmetry},
                               {"min_det_g", min_det},
                               {"residuals", report_json(gcr)}});
  return out.finish(0);
}

int run_check_gcr(const RunConfig& config) {
  require_inputs(config, 2, 3, "g, B and optionally N field files");
  const MetricField<double> g(load(config.inputs[0], "metric"));
  const SecondFormField<double> B(load(config.inputs[1], "second_form"));
  require(B.chart() == g.chart(), "check-gcr: g and B live on different charts");
  NormalConnectionField<double> N;
  if (config.inputs.size() == 3) {
    N = NormalConnectionField<double>(load(config.inputs[2], "normal_connection"));
    require(N.chart() == g.chart(), "check-gcr: g and N live on different charts");
  } else {
    require(g.chart().codim() == 1, "check-gcr: N is required in codimension > 1");
    N = NormalConnectionField<double>::zero(g.chart());
  }
  const auto gcr = gcr_residuals(g, B, N, config.p, config.tol);
  Artifacts out(config);
  out.json_file("residuals.json", report_json(gcr));
  return out.finish(0);
}

int run_reconstruct(const RunConfig& config) {
  require_inputs(config, 3, 4, "g, B, N field files and an optional {A0, f0} JSON file");
  const MetricField<double> g(load(config.inputs[0], "metric"));
  const SecondFormField<double> B(load(config.inputs[1], "second_form"));
  const NormalConnectionField<double> N(load(config.inputs[2], "normal_connection"));
  require(B.chart() == g.chart() && N.chart() == g.chart(), "reconstruct: g, B and N live on different charts");
  const auto& chart = g.chart();
  require(config.p > chart.dim(), "reconstruct: p must exceed the dimension d");

  const int n = chart.ambient_dim();
  json initial = json::object();
  if (config.inputs.size() == 4) {
    std::ifstream is(config.inputs[3]);
    initial = json::parse(is, nullptr, false);
    require(initial.is_object(), "reconstruct: " + config.inputs[3].string() + " is not a JSON object");
  }
  for (const char* key : {"A0", "f0"})
    if (config.params.contains(key)) initial[key] = config.params[key];
  const M A0 = initial.contains("A0") ? matrix_from_json(initial["A0"], n, n, "A0") : M(M::Identity(n, n));
  const V f0 = initial.contains("f0") ? vector_from_json(initial["f0"], n, "f0") : V(V::Zero(n));
  require_special_orthogonal<double>(A0, 1e-9, "reconstruct: A0");

  const auto rec = reconstruct(g, B, N, A0, f0, config.p);
  const auto gcr = gcr_residuals(g, B, N, config.p, config.tol);
  const double hol_threshold = holonomy_threshold(rec.W);
  const bool compatible = gcr.compatible && rec.holonomy <= hol_threshold;

  Artifacts out(config);
  out.json_file("diagnostics.json", {{"holonomy", rec.holonomy},
                                     {"holonomy_threshold", hol_threshold},
                                     {"structural", rec.structural},
                                     {"isometry_defect", rec.isometry_defect},
                                     {"orthogonality_defect", rec.A.orthogonality_defect()},
                                     {"residuals", report_json(gcr)},
                                     {"compatible", compatible},
                                     {"forced", config.force && !compatible}});
  if (!compatible && !config.force) {
    std::cerr << "ff reconstruct: data fails the compatibility check (gauss " << gcr.gauss << ", codazzi "
              << gcr.codazzi << ", threshold " << gcr.threshold << "; holonomy " << rec.holonomy << ", threshold "
              << hol_threshold << "); use --force to write the reconstruction anyway\n";
    return out.finish(2);
  }
  out.field(rec.f, "f", "immersion");
  out.field(rec.A, "A", "frame");
  return out.finish(0);
}

int run_align(const RunConfig& config) {
  require_inputs(config, 2, 2, "an immersion file and a reference immersion file");
  const ImmersionField<double> f(load(config.inputs[0], "immersion"));
  const ImmersionField<double> ref(load(config.inputs[1], "immersion"));
  require(f.chart() == ref.chart(), "align: immersions live on different charts");
  const auto motion = best_rigid_motion(f, ref);
  const Field<double> diff = motion.apply(f).field() - ref.field();
  Artifacts out(config);
  out.json_file("motion.json", {{"rotation", matrix_json(motion.rotation)},
                                {"translation", vector_json(motion.translation)},
                                {"residual_max", diff.values().rowwise().norm().maxCoeff()},
                                {"residual_lp", lp_norm(diff, config.p)},
                                {"p", config.p},
                                {"quotient_distance_1", quotient_distance(f, ref, 1, config.p)},
                                {"quotient_distance_2", quotient_distance(f, ref, 2, config.p)}});
  return out.finish(0);
}

int run_rigidity(const RunConfig& config) {
  PerturbedRotationFamily<double> family;
  if (config.params.contains("base_rotation"))
    family.base_rotation = matrix_from_json(config.params["base_rotation"], 3, 3, "base_rotation");
  if (config.params.contains("direction"))
    family.direction = vector_from_json(config.params["direction"], 3, "direction");
  family.amplitude = param<double>(config, "amplitude", family.amplitude);
  family.resolution = param<int>(config, "resolution", family.resolution);
  const auto t = param<std::vector<double>>(config, "t", halvings(3, 8));
  const int random_rotations = param<int>(config, "random_rotations", 20);
  require(!t.empty(), "rigidity: t list is empty");
  require(random_rotations >= 0, "rigidity: random_rotations must be >= 0");
  for (double x : t) require(std::isfinite(x) && x >= 0, "rigidity: t values must be finite and >= 0");

  const auto reports = rigidity_experiment(family, t, random_rotations, config.seed);
  std::vector<std::vector<double>> rows;
  json list = json::array();
  std::vector<double> ts, defect, lhs, ratio;
  bool all_beat = true;
  for (const auto& r : reports) {
    rows.push_back({r.t, r.defect, r.lhs, r.ratio, r.random_min_lhs, r.beats_random ? 1.0 : 0.0});
    list.push_back({{"t", r.t},
                    {"defect", r.defect},
                    {"lhs", r.lhs},
                    {"ratio", r.ratio},
                    {"exact_isometry", r.exact_isometry},
                    {"rotation", matrix_json(r.motion.rotation)},
                    {"boundary_deviation", r.boundary_deviation},
                    {"random_min_lhs", r.random_min_lhs},
                    {"beats_random", r.beats_random}});
    all_beat = all_beat && r.beats_random;
    if (!r.exact_isometry) {
      ts.push_back(r.t);
      defect.push_back(r.defect);
      lhs.push_back(r.lhs);
      ratio.push_back(r.ratio);
    }
  }
  Artifacts out(config);
  out.csv("rigidity.csv", {"t", "defect", "lhs", "ratio", "random_min_lhs", "beats_random"}, rows);
  out.json_file("reports.json", list);
  out.json_file("summary.json", {{"defect_slope", slope_or_nan(ts, defect)},
                                 {"lhs_slope", slope_or_nan(ts, lhs)},
                                 {"ratio_spread", spread(ratio)},
                                 {"all_beat_random", all_beat},
                                 {"random_rotations", random_rotations},
                                 {"resolution", family.resolution},
                                 {"seed", config.seed}});
  return out.finish(0);
}

int run_depend(const RunConfig& config) {
  std::vector<double> default_s{0.0};
  for (double s : halvings(2, 7)) default_s.push_back(s);
  const auto family = param<std::string>(config, "family", "sphere_radius");
  const auto s = param<std::vector<double>>(config, "s", default_s);
  const int n = param<int>(config, "resolution", 33);
  const auto study = lipschitz_study(family, s, n, config.p);

  std::vector<std::vector<double>> rows;
  bool all_compatible = true;
  for (const auto& x : study.samples) {
    rows.push_back({x.s, x.t_distance, x.v_distance, x.ratio, x.frame_distance, x.connection_distance,
                    x.pfaff_ratio, x.coframe_distance, x.metric_distance, x.coframe_ratio, x.holonomy, x.gauss,
                    x.compatible ? 1.0 : 0.0});
    all_compatible = all_compatible && x.compatible;
  }
  std::mt19937_64 rng(config.seed);
  const double gauge = gauge_distance(compatible_forms(family, s.back(), n), random_rotation<double>(3, rng), config.p);

  Artifacts out(config);
  out.csv("depend.csv",
          {"s", "t_distance", "v_distance", "ratio", "frame_distance", "connection_distance", "pfaff_ratio",
           "coframe_distance", "metric_distance", "coframe_ratio", "holonomy", "gauss", "compatible"},
          rows);
  out.json_file("summary.json", {{"family", family},
                                 {"resolution", n},
                                 {"p", config.p},
                                 {"slope", study.slope},
                                 {"ratio_spread", study.ratio_spread},
                                 {"pfaff_spread", study.pfaff_spread},
                                 {"coframe_spread", study.coframe_spread},
                                 {"all_compatible", all_compatible},
                                 {"gauge_distance", gauge},
                                 {"seed", config.seed}});
  return out.finish(0);
}

int run_converge(const RunConfig& config) {
  const auto generator = param<std::string>(config, "generator", "wrinkles");
  const auto eps = param<std::vector<double>>(config, "eps", halvings(2, 6));
  const auto resolution = param<std::vector<int>>(config, "resolution", {});
  const int dict = config.dict_size > 0 ? config.dict_size : 4;
  const int j_dict = param<int>(config, "j_dict_size", 8);
  const double r = param<double>(config, "r", 1.5);
  require(config.p > 1, "converge: p must be > 1");
  const double p_dual = config.p / (config.p - 1);

  const auto seq = membrane_sequence(generator, eps, resolution);
  const auto v = default_vector_fields(seq.chart());
  const auto weak = weak_limit_check(seq, dict, config.p, config.tol);

  std::vector<double> gap, jsum;
  std::array<std::vector<double>, 8> jl;
  std::vector<std::vector<double>> rows;
  for (std::size_t i = 0; i < eps.size(); ++i) {
    const auto dec = error_decomposition(seq, eps[i], v, r, j_dict);
    gap.push_back(sobolev_norm(pullback_metric(seq, eps[i]).field() - seq.g.field(), 1, p_dual));
    jsum.push_back(dec.sum);
    std::vector<double> row{eps[i], gap.back(), weak.second_form_norms[i], dec.sum};
    for (int l = 0; l < 8; ++l) {
      jl[l].push_back(dec.J[l]);
      row.push_back(dec.J[l]);
    }
    row.push_back(dec.remainder);
    row.push_back(dec.exact);
    row.push_back(i == 0 ? kNaN : weak.deltas[i - 1]);
    row.push_back(weak.strong_distance[i]);
    rows.push_back(std::move(row));
  }
  json j_slopes = json::array();
  for (const auto& x : jl) j_slopes.push_back(slope_or_nan(eps, x));
  double min_ratio = std::numeric_limits<double>::infinity();
  for (double x : weak.delta_ratios) min_ratio = std::min(min_ratio, x);

  Artifacts out(config);
  out.csv("converge.csv",
          {"eps", "metric_gap", "second_form_norm", "j_sum", "j1", "j2", "j3", "j4", "j5", "j6", "j7", "j8",
           "remainder", "exact", "pairing_delta", "strong_distance"},
          rows);
  out.json_file("summary.json", {{"generator", generator},
                                 {"p", config.p},
                                 {"dual_exponent", p_dual},
                                 {"dict_size", dict},
                                 {"j_dict_size", j_dict},
                                 {"r", r},
                                 {"metric_rate", seq.metric_rate},
                                 {"metric_gap_slope", slope_or_nan(eps, gap)},
                                 {"j_sum_slope", slope_or_nan(eps, jsum)},
                                 {"j_slopes", j_slopes},
                                 {"delta_ratios", weak.delta_ratios},
                                 {"min_delta_ratio", min_ratio},
                                 {"weak_not_strong", weak.weak_not_strong},
                                 {"extrapolation_gap", weak.extrapolation_gap},
                                 {"gauss", weak.gauss},
                                 {"threshold", weak.threshold},
                                 {"gauss_ok", weak.gauss_ok},
                                 {"weak_gauss", weak.weak_gauss},
                                 {"lipschitz", seq.lipschitz},
                                 {"seed", config.seed}});
  return out.finish(0);
}

int execute(const RunConfig& config) {
  static const std::map<std::string, int (*)(const RunConfig&)> table{
      {"reconstruct", run_reconstruct}, {"forms", run_forms},   {"check-gcr", run_check_gcr},
      {"align", run_align},             {"rigidity", run_rigidity}, {"depend", run_depend},
      {"converge", run_converge},       {"fixture", run_fixture}};
  try {
    const auto it = table.find(config.subcommand);
    require(it != table.end(), "unknown subcommand '" + config.subcommand + "'");
    const auto& allowed = allowed_params().at(config.subcommand);
    for (const auto& [key, value] : config.params.items())
      require(allowed.count(key) > 0, "unknown parameter '" + key + "'");
    require(config.p >= 1, "p must be >= 1");
    require(config.dict_size >= 0, "dict-size must be nonnegative");
    return it->second(config);
  } catch (const ValidationError& e) {
    std::cerr << "ff " << config.subcommand << ": " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "ff " << config.subcommand << ": numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const json::exception& e) {
    std::cerr << "ff " << config.subcommand << ": malformed JSON: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "ff " << config.subcommand << ": " << e.what() << "\n";
    return 2;
  }
}

int run(int argc, const char* const* argv) {
  CLI::App app{"Reconstruction of immersions from fundamental forms, with rigidity and stability studies", "ff"};
  app.set_version_flag("--version", kVersion);
  std::vector<std::string> inputs, sets;
  std::string output_dir, config_path;
  double p = 4, tol = -1;
  int dict_size = 0;
  bool force = false;
  std::uint64_t seed = 0;
  app.add_option("-i,--input", inputs, "Input file (repeatable, order matters)");
  app.add_option("--output-dir", output_dir, "Directory for artifacts (created if missing)");
  app.add_option("--p", p, "Lebesgue exponent of every reported norm");
  app.add_option("--tol", tol, "Compatibility threshold (default: calibrated)");
  app.add_option("--dict-size", dict_size, "Test dictionary size per axis");
  app.add_flag("--force", force, "Write reconstructions of incompatible data");
  app.add_option("--seed", seed, "Seed of randomised steps");
  app.add_option("--config", config_path, "Config file of key = JSON value lines");
  app.add_option("--set", sets, "Extra parameter KEY=JSON (repeatable)");
  const std::map<std::string, std::string> help{
      {"reconstruct", "Integrate (g, B, N) to a frame and an immersion"},
      {"forms", "Harvest (g, B, N) from an immersion"},
      {"check-gcr", "Gauss, Codazzi and Ricci residuals of (g, B, N)"},
      {"align", "Best rigid motion between two immersions"},
      {"rigidity", "Rigidity study of perturbed rotations of the sphere"},
      {"depend", "Lipschitz study on a compatible family"},
      {"converge", "Convergence study of a membrane sequence"},
      {"fixture", "Write an analytic immersion fixture"}};
  for (const auto& name : subcommands()) app.add_subcommand(name, help.at(name))->fallthrough();
  app.require_subcommand(1);
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  RunConfig config;
  config.subcommand = app.get_subcommands().front()->get_name();
  try {
    if (!config_path.empty()) apply_settings(config, read_config_file(config_path));
    for (const auto& in : inputs) config.inputs.emplace_back(in);
    if (config.subcommand == "rigidity" || config.subcommand == "depend" || config.subcommand == "converge") {
      for (const auto& in : inputs) {
        std::ifstream is(in);
        require(bool(is), "cannot open " + in);
        json settings = json::parse(is, nullptr, false);
        require(settings.is_object(), in + " is not a JSON object");
        settings.erase("inputs");
        settings.erase("output_dir");
        apply_settings(config, settings);
      }
    }
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      require(eq != std::string::npos, "--set expects KEY=JSON, got '" + s + "'");
      apply_settings(config, {{normalise_key(trim(s.substr(0, eq))), parse_value(trim(s.substr(eq + 1)))}});
    }
    if (app.count("--output-dir")) config.output_dir = output_dir;
    if (app.count("--p")) config.p = p;
    if (app.count("--tol")) config.tol = tol;
    if (app.count("--dict-size")) config.dict_size = dict_size;
    if (app.count("--force")) config.force = force;
    if (app.count("--seed")) config.seed = seed;
    for (const auto& in : config.inputs) require(fs::exists(in), "input " + in.string() + " does not exist");
  } catch (const ValidationError& e) {
    std::cerr << "ff " << config.subcommand << ": " << e.what() << "\n";
    return 2;
  }
  return execute(config);
}

}  // namespace ff::cli

#include "ff/io.hpp"

#include <bit>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include <json.hpp>

namespace ff::io {

namespace fs = std::filesystem;
using nlohmann::json;

static_assert(std::endian::native == std::endian::little,
              "field payloads are little-endian; big-endian hosts need byte swapping");

fs::path write_field(const Field<double>& field, const fs::path& stem, const std::string& kind) {
  const auto& chart = field.chart();
  fs::path header = stem;
  header += ".json";
  fs::path payload = stem;
  payload += ".bin";
  if (stem.has_parent_path()) fs::create_directories(stem.parent_path());

  json extent = json::array();
  for (const auto& [a, b] : chart.extent()) extent.push_back({a, b});
  json h = {{"dim_d", chart.dim()},
            {"codim_k", chart.codim()},
            {"extent", extent},
            {"resolution", chart.resolutions()},
            {"tensor_shape", field.shape()},
            {"dtype", "f64"},
            {"order", "row-major"},
            {"payload", payload.filename().string()}};
  if (!kind.empty()) h["kind"] = kind;

  std::ofstream hs(header);
  if (!hs) throw ValidationError("cannot write " + header.string());
  hs << h.dump(2) << "\n";

  std::ofstream bs(payload, std::ios::binary);
  if (!bs) throw ValidationError("cannot write " + payload.string());
  bs.write(reinterpret_cast<const char*>(field.values().data()),
           static_cast<std::streamsize>(field.values().size() * sizeof(double)));
  return header;
}

static json load_header(const fs::path& header) {
  std::ifstream hs(header);
  if (!hs) throw ValidationError("cannot open field header " + header.string());
  try {
    return json::parse(hs);
  } catch (const json::exception& e) {
    throw ValidationError("malformed field header " + header.string() + ": " + e.what());
  }
}

Field<double> read_field(const fs::path& header) {
  const json h = load_header(header);
  try {
    if (h.at("dtype") != "f64" || h.at("order") != "row-major")
      throw ValidationError("field header " + header.string() + ": only f64 row-major supported");
    const int d = h.at("dim_d");
    const int k = h.at("codim_k");
    std::vector<std::pair<double, double>> extent;
    for (const auto& e : h.at("extent")) extent.emplace_back(e.at(0), e.at(1));
    const auto res = h.at("resolution").get<std::vector<int>>();
    const auto shape = h.at("tensor_shape").get<std::vector<int>>();
    Chart<double> chart(d, k, extent, res);

    fs::path payload = header.parent_path() / h.at("payload").get<std::string>();
    std::ifstream bs(payload, std::ios::binary | std::ios::ate);
    if (!bs) throw ValidationError("cannot open field payload " + payload.string());
    Field<double> field(chart, shape);
    const auto expected = static_cast<std::streamoff>(field.values().size() * sizeof(double));
    if (bs.tellg() != expected)
      throw ValidationError("field payload " + payload.string() + " has wrong size");
    bs.seekg(0);
    bs.read(reinterpret_cast<char*>(field.values().data()), expected);
    if (!field.all_finite())
      throw ValidationError("field " + header.string() + " contains non-finite values");
    return field;
  } catch (const json::exception& e) {
    throw ValidationError("field header " + header.string() + ": " + e.what());
  }
}

std::string read_kind(const fs::path& header) {
  const json h = load_header(header);
  return h.value("kind", "");
}

std::string format_double(double value) {
  std::ostringstream s;
  s.precision(std::numeric_limits<double>::max_digits10);
  s << value;
  return s.str();
}

void write_csv(const Field<double>& field, const fs::path& path) {
  const auto& chart = field.chart();
  require(chart.dim() == 2, "csv export is only defined for d = 2 charts");
  std::ofstream os(path);
  if (!os) throw ValidationError("cannot write " + path.string());
  os << "x,y";
  for (Index c = 0; c < field.components(); ++c) os << ",c" << c;
  os << "\n";
  for (Index p = 0; p < chart.num_points(); ++p) {
    const auto x = chart.point(p);
    os << format_double(x[0]) << "," << format_double(x[1]);
    for (Index c = 0; c < field.components(); ++c) os << "," << format_double(field(p, c));
    os << "\n";
  }
}

}  // namespace ff::io

#include "spip/instance_io.hpp"

#include <fstream>
#include <sstream>

#include "spip/errors.hpp"

namespace spip {
namespace {

using nlohmann::json;

std::string pointer(const std::string& base, const std::string& key) { return base + "/" + key; }
std::string pointer(const std::string& base, std::size_t index) { return base + "/" + std::to_string(index); }

const json& field(const json& obj, const std::string& base, const char* key) {
  if (!obj.contains(key)) throw ParseError(pointer(base, key), "missing required field");
  return obj.at(key);
}

Rational read_rational(const json& j, const std::string& where) {
  try {
    if (j.is_string()) return parse_rational(j.get<std::string>());
    if (j.is_number_integer()) return Rational(j.get<std::int64_t>());
  } catch (const std::exception& e) {
    throw ParseError(where, e.what());
  }
  throw ParseError(where, "expected a rational string such as \"1/2\"");
}

std::int64_t read_int(const json& j, const std::string& where) {
  if (!j.is_number_integer()) throw ParseError(where, "expected an integer");
  return j.get<std::int64_t>();
}

LatticePoint read_point(const json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw ParseError(where, "expected [x, y]");
  return {read_int(j[0], pointer(where, 0)), read_int(j[1], pointer(where, 1))};
}

AffineMap read_map(const json& j, const std::string& where) {
  if (!j.is_object()) throw ParseError(where, "expected an object with \"a\" and \"b\"");
  const std::string a_at = pointer(where, "a");
  const json& a = field(j, where, "a");
  if (!a.is_array() || a.size() != 2) throw ParseError(a_at, "expected a 2x2 array of rationals");
  Matrix2q m;
  for (std::size_t r = 0; r < 2; ++r) {
    const std::string row_at = pointer(a_at, r);
    if (!a[r].is_array() || a[r].size() != 2) throw ParseError(row_at, "expected a row of two rationals");
    for (std::size_t c = 0; c < 2; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = read_rational(a[r][c], pointer(row_at, c));
  }
  const std::string b_at = pointer(where, "b");
  const json& b = field(j, where, "b");
  if (!b.is_array() || b.size() != 2) throw ParseError(b_at, "expected two rationals");
  try {
    return AffineMap(m, Vector2q(read_rational(b[0], pointer(b_at, 0)), read_rational(b[1], pointer(b_at, 1))));
  } catch (const NotContractive& e) {
    throw ParseError(a_at, e.what());
  }
}

std::optional<std::uint64_t> read_seed(const json& seeds, const char* key) {
  if (!seeds.contains(key)) return std::nullopt;
  const json& v = seeds.at(key);
  if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
    throw ParseError(pointer("/seeds", key), "expected a non-negative integer");
  return v.get<std::uint64_t>();
}

std::string line_column(std::string_view text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i + 1 < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace

InstanceFile parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw ParseError(line_column(text, e.byte), "malformed JSON");
  }
  if (!doc.is_object()) throw ParseError("/", "expected a JSON object");

  const json& maps_json = field(doc, "", "maps");
  if (!maps_json.is_array() || maps_json.empty()) throw ParseError("/maps", "expected a non-empty array of maps");
  std::vector<AffineMap> maps;
  for (std::size_t i = 0; i < maps_json.size(); ++i) maps.push_back(read_map(maps_json[i], pointer("/maps", i)));

  const Rational epsilon = read_rational(field(doc, "", "epsilon"), "/epsilon");
  BigInt q = NoiseBound::kDefaultDenominator;
  if (doc.contains("sample_denominator")) {
    const json& qj = doc.at("sample_denominator");
    try {
      q = qj.is_string() ? parse_bigint(qj.get<std::string>()) : BigInt(read_int(qj, "/sample_denominator"));
    } catch (const std::invalid_argument& e) {
      throw ParseError("/sample_denominator", e.what());
    }
  }
  const std::int64_t steps = read_int(field(doc, "", "steps"), "/steps");
  if (steps < 0 || steps > 1'000'000) throw ParseError("/steps", "expected 0 ≤ steps ≤ 1000000");

  InstanceFile out{SpipInstance{TransformSet(std::move(maps)), NoiseBound(Rational(0)), static_cast<int>(steps),
                                read_point(field(doc, "", "x0"), "/x0"), std::nullopt},
                   std::nullopt, std::nullopt};
  try {
    out.instance.noise = NoiseBound(epsilon, q);
  } catch (const InputError& e) {
    throw ParseError("/epsilon", e.what());
  }
  if (doc.contains("target") && !doc.at("target").is_null()) out.instance.target = read_point(doc.at("target"), "/target");
  if (doc.contains("seeds")) {
    const json& seeds = doc.at("seeds");
    if (!seeds.is_object()) throw ParseError("/seeds", "expected an object");
    out.noise_seed = read_seed(seeds, "noise");
    out.map_seed = read_seed(seeds, "map");
  }
  return out;
}

InstanceFile load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), "cannot open file");
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_instance(buf.str());
  } catch (const ParseError& e) {
    throw ParseError(path.string() + ": " + e.where(), std::string(e.what()).substr(e.where().size() + 2));
  }
}

nlohmann::json instance_to_json(const InstanceFile& file) {
  const SpipInstance& inst = file.instance;
  json maps = json::array();
  for (const AffineMap& m : inst.maps) {
    const Matrix2q& a = m.linear();
    // Explicit arrays: two-string initializer lists would otherwise read as objects.
    json rows = json::array({json::array({to_string(a(0, 0)), to_string(a(0, 1))}),
                             json::array({to_string(a(1, 0)), to_string(a(1, 1))})});
    maps.push_back({{"a", std::move(rows)}, {"b", json::array({to_string(m.offset()(0)), to_string(m.offset()(1))})}});
  }
  json doc = {{"maps", std::move(maps)},
              {"epsilon", to_string(inst.noise.epsilon())},
              {"sample_denominator", to_string(inst.noise.sample_denominator())},
              {"steps", inst.steps},
              {"x0", json::array({inst.x0.x, inst.x0.y})}};
  if (inst.target) doc["target"] = json::array({inst.target->x, inst.target->y});
  if (file.noise_seed || file.map_seed) {
    json seeds = json::object();
    if (file.noise_seed) seeds["noise"] = *file.noise_seed;
    if (file.map_seed) seeds["map"] = *file.map_seed;
    doc["seeds"] = std::move(seeds);
  }
  return doc;
}

}  // namespace spip

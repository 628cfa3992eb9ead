#pragma once

// Loader for externally supplied seed integrals (genus >= 2 base values of
// the bracket reduction). The file is a JSON array of records
//     {"g": 2, "I": [0, 0], "b": [4], "value": "1/1152"}
// subject to: g >= 2, I of length g with nonnegative entries, every b entry
// >= 2, |b| = mu_g(I) + len(b), value in num/den form. Duplicate keys and
// malformed records are rejected with the record index in the message.

#include <gwproj/hodge.hpp>
#include <gwproj/rational.hpp>

#include <nlohmann/json.hpp>

#include <fstream>
#include <stdexcept>
#include <string>

namespace gwproj {

inline SeedTable parse_seed_json(const nlohmann::json& doc) {
  if (!doc.is_array()) throw std::runtime_error("seed table: top level must be an array");
  SeedTable table;
  for (size_t idx = 0; idx < doc.size(); ++idx) {
    const auto& rec = doc[idx];
    auto fail = [idx](const std::string& why) -> std::runtime_error {
      return std::runtime_error("seed record " + std::to_string(idx) + ": " + why);
    };
    if (!rec.is_object()) throw fail("not an object");
    for (const char* field : {"g", "I", "b", "value"})
      if (!rec.contains(field)) throw fail(std::string("missing field '") + field + "'");
    if (!rec["g"].is_number_integer()) throw fail("g must be an integer");
    int g = rec["g"].get<int>();
    if (g < 2) throw fail("g must be at least 2");
    if (!rec["I"].is_array() || !rec["b"].is_array()) throw fail("I and b must be arrays");
    LVec I, b;
    for (const auto& x : rec["I"]) {
      if (!x.is_number_integer() || x.get<long>() < 0)
        throw fail("I entries must be nonnegative integers");
      I.push_back(x.get<long>());
    }
    for (const auto& x : rec["b"]) {
      if (!x.is_number_integer() || x.get<long>() < 2)
        throw fail("b entries must be integers >= 2");
      b.push_back(x.get<long>());
    }
    if (I.size() != static_cast<size_t>(g)) throw fail("I must have length g");
    long mu = mu_of(g, I);
    if (vec_sum(b) != mu + static_cast<long>(b.size()))
      throw fail("dimension mismatch: need |b| = mu + len(b)");
    if (!rec["value"].is_string()) throw fail("value must be a num/den string");
    auto v = rat_parse(rec["value"].get<std::string>());
    if (!v) throw fail("value does not parse as a rational");
    std::sort(b.begin(), b.end(), std::greater<>());
    SeedKey key{g, I, b};
    if (!table.emplace(key, *v).second) throw fail("duplicate key");
  }
  return table;
}

inline SeedTable load_seed_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("seed table: cannot open " + path);
  nlohmann::json doc;
  try {
    in >> doc;
  } catch (const std::exception& e) {
    throw std::runtime_error("seed table: JSON parse error in " + path + ": " + e.what());
  }
  return parse_seed_json(doc);
}

}  // namespace gwproj

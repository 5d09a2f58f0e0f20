#include "m3fg/policy_io.hpp"

#include <charconv>
#include <istream>
#include <ostream>

#include <json.hpp>

#include "m3fg/errors.hpp"

namespace m3fg {

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

namespace {

template <std::size_t R, class Tag>
void write_nested(std::ostream& os, const Tensor<R, Tag>& t) {
  const auto& shape = t.shape();
  const auto& data = t.data();
  std::array<std::size_t, R> idx{};
  std::size_t flat = 0;
  // Opening brackets for every axis, then walk the flat data closing and
  // reopening as indices roll over.
  for (std::size_t k = 0; k < R; ++k) os << '[';
  if (data.empty()) {
    for (std::size_t k = 0; k < R; ++k) os << ']';
    return;
  }
  for (;;) {
    os << format_double(data[flat++]);
    std::size_t axis = R;
    while (axis > 0) {
      --axis;
      if (++idx[axis] < shape[axis]) break;
      idx[axis] = 0;
      os << ']';
      if (axis == 0) return;
    }
    os << ',';
    for (std::size_t k = axis + 1; k < R; ++k) os << '[';
  }
}

template <std::size_t R, class Tag>
Tensor<R, Tag> read_nested(const nlohmann::json& j, const char* name) {
  typename Tensor<R, Tag>::Shape shape{};
  const nlohmann::json* cur = &j;
  for (std::size_t k = 0; k < R; ++k) {
    if (!cur->is_array() || cur->empty()) throw ConfigError(std::string("policy field '") + name + "' is malformed");
    shape[k] = cur->size();
    cur = &(*cur)[0];
  }
  Tensor<R, Tag> t(shape);
  std::size_t flat = 0;
  auto walk = [&](auto&& self, const nlohmann::json& node, std::size_t depth) -> void {
    if (!node.is_array() || node.size() != shape[depth]) {
      throw ConfigError(std::string("policy field '") + name + "' is ragged");
    }
    for (const auto& child : node) {
      if (depth + 1 == R) {
        if (!child.is_number()) throw ConfigError(std::string("policy field '") + name + "' holds a non-number");
        t.data()[flat++] = child.get<double>();
      } else {
        self(self, child, depth + 1);
      }
    }
  };
  walk(walk, j, 0);
  return t;
}

}  // namespace

void write_policy(std::ostream& os, const PolicyDocument& doc) {
  os << "{\"env\":" << nlohmann::json(doc.env).dump() << ",\"bins\":" << doc.bins << ",\"horizon\":";
  if (const auto* f = std::get_if<FiniteHorizon>(&doc.horizon)) {
    os << "{\"type\":\"finite\",\"steps\":" << f->steps << "}";
  } else {
    os << "{\"type\":\"discounted\",\"gamma\":" << format_double(std::get<DiscountedHorizon>(doc.horizon).gamma)
       << "}";
  }
  os << ",\n\"minor\":";
  write_nested(os, doc.policy.minor);
  os << ",\n\"major\":";
  write_nested(os, doc.policy.major);
  os << "}\n";
}

PolicyDocument read_policy(std::istream& is) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy file is not valid JSON: ") + e.what());
  }
  try {
    PolicyDocument doc;
    doc.env = j.at("env").get<std::string>();
    doc.bins = j.at("bins").get<int>();
    const auto& h = j.at("horizon");
    const auto type = h.at("type").get<std::string>();
    if (type == "finite") {
      doc.horizon = FiniteHorizon{h.at("steps").get<int>()};
    } else if (type == "discounted") {
      doc.horizon = DiscountedHorizon{h.at("gamma").get<double>()};
    } else {
      throw ConfigError("unknown horizon type '" + type + "'");
    }
    doc.policy.minor = read_nested<5, MinorPolicyTag>(j.at("minor"), "minor");
    doc.policy.major = read_nested<4, MajorPolicyTag>(j.at("major"), "major");
    return doc;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("policy file is missing a field: ") + e.what());
  }
}

}  // namespace m3fg

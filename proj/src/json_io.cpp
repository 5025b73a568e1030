#include "ridgefind/json_io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ridgefind/error.hpp"

namespace ridgefind {

namespace {

void write_real(std::string& out, double x) {
  if (!std::isfinite(x)) throw NumericalError("cannot serialize a non-finite real");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  out += buf;
  // Keep a marker of realness so the value reads back as a double (this also preserves -0.0).
  bool has_marker = false;
  for (const char* p = buf; *p; ++p)
    if (*p == '.' || *p == 'e' || *p == 'E') has_marker = true;
  if (!has_marker) out += ".0";
}

void write_string(std::string& out, const std::string& s) {
  out += Json(s).dump();
}

void dump_impl(std::string& out, const Json& j, int indent, int depth) {
  const auto newline = [&](int d) {
    if (indent < 0) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_string(out, it.key());
        out += indent < 0 ? ":" : ": ";
        dump_impl(out, it.value(), indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool scalar = true;
      for (const auto& e : j)
        if (e.is_object() || e.is_array()) scalar = false;
      out += '[';
      bool first = true;
      for (const auto& e : j) {
        if (!first) out += scalar && indent >= 0 ? ", " : ",";
        first = false;
        if (!scalar) newline(depth + 1);
        dump_impl(out, e, indent, depth + 1);
      }
      if (!scalar) newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::number_float:
      write_real(out, j.get<double>());
      return;
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

std::string dump_json(const Json& j, int indent) {
  std::string out;
  dump_impl(out, j, indent, 0);
  return out;
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw InputError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

void write_json_file(const std::filesystem::path& path, const Json& j, int indent) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_json(j, indent) << '\n';
}

void append_json_line(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::app);
  if (!out) throw IoError("cannot write " + path.string());
  out << dump_json(j, -1) << '\n';
}

Json to_json(const Eigen::VectorXd& v) {
  Json a = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) a.push_back(v[k]);
  return a;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  if (!j.is_array()) throw InputError("expected a JSON array of reals");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t k = 0; k < j.size(); ++k) v[static_cast<Eigen::Index>(k)] = j[k].get<double>();
  return v;
}

Json activation_to_json(const Activation& a) {
  return Json{{"kind", to_string(a.kind())}, {"params", a.params()}};
}

Activation activation_from_json(const Json& j) {
  try {
    const auto kind = activation_kind_from_string(j.at("kind").get<std::string>());
    std::vector<double> params;
    if (j.contains("params")) params = j.at("params").get<std::vector<double>>();
    return Activation::make(kind, params);
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed activation: ") + e.what());
  }
}

Json instance_to_json(const SumOfFeaturesModel& model, const NoiseSpec& noise) {
  Json feats = Json::array();
  for (const auto& f : model.features())
    feats.push_back({{"coeff", f.coeff}, {"direction", to_json(f.direction)}, {"activation", activation_to_json(f.activation)}});
  return Json{{"dim", model.dim()},
              {"features", feats},
              {"lipschitz", model.lipschitz()},
              {"gamma", model.gamma()},
              {"noise", {{"kind", to_string(noise.kind)}, {"eps", noise.eps}, {"seed", noise.seed}}}};
}

Instance instance_from_json(const Json& j) {
  try {
    const auto dim = j.at("dim").get<std::size_t>();
    std::vector<Feature> feats;
    for (const auto& fj : j.at("features")) {
      Feature f;
      f.coeff = fj.at("coeff").get<double>();
      f.direction = vector_from_json(fj.at("direction"));
      f.activation = activation_from_json(fj.at("activation"));
      feats.push_back(std::move(f));
    }
    NoiseSpec noise;
    if (j.contains("noise")) {
      const auto& nj = j.at("noise");
      noise.kind = noise_kind_from_string(nj.value("kind", std::string("none")));
      noise.eps = nj.value("eps", 0.0);
      noise.seed = nj.value("seed", std::uint64_t{0});
    }
    SumOfFeaturesModel m(dim, std::move(feats), j.at("lipschitz").get<double>(), j.at("gamma").get<double>());
    return Instance{std::move(m), noise};
  } catch (const Json::exception& e) {
    throw InputError(std::string("malformed instance: ") + e.what());
  }
}

}  // namespace ridgefind

#include "mhb/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mhb/error.hpp"

namespace mhb::io {

namespace {

[[noreturn]] void parse_error(const std::string& what) {
  throw Error(ErrorCode::ConfigParse, what);
}

double number(const Json& j, const char* what) {
  if (!j.is_number()) parse_error(std::string(what) + " must be a number");
  const double v = j.get<double>();
  if (!std::isfinite(v)) parse_error(std::string(what) + " must be finite");
  return v;
}

const Json& member(const Json& j, const char* key, const char* context) {
  if (!j.is_object() || !j.contains(key)) {
    parse_error(std::string(context) + " is missing \"" + key + "\"");
  }
  return j.at(key);
}

std::vector<double> number_list(const Json& j, const char* what) {
  if (!j.is_array()) parse_error(std::string(what) + " must be an array");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

State state_index(const Json& j) {
  if (!j.is_number_integer() || j.get<long long>() < 0) {
    parse_error("pair state index must be a nonnegative integer");
  }
  return static_cast<State>(j.get<long long>());
}

void write_json(std::string& out, const Json& j, int indent, int depth) {
  const bool pretty = indent >= 0;
  auto newline = [&](int d) {
    if (!pretty) return;
    out += '\n';
    out.append(static_cast<std::size_t>(indent * d), ' ');
  };
  switch (j.type()) {
    case Json::value_t::number_float: {
      const double v = j.get<double>();
      if (std::isfinite(v)) {
        out += format_double(v);
      } else {
        out += std::isnan(v) ? "\"nan\"" : (v > 0 ? "\"inf\"" : "\"-inf\"");
      }
      return;
    }
    case Json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      out += '[';
      bool first = true;
      for (const auto& v : j) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        write_json(out, v, indent, depth + 1);
      }
      newline(depth);
      out += ']';
      return;
    }
    case Json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += '{';
      bool first = true;
      for (const auto& [key, v] : j.items()) {
        if (!first) out += ',';
        first = false;
        newline(depth + 1);
        out += Json(key).dump();
        out += pretty ? ": " : ":";
        write_json(out, v, indent, depth + 1);
      }
      newline(depth);
      out += '}';
      return;
    }
    default:
      out += j.dump();
      return;
  }
}

}  // namespace

Json load_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::FileNotFound,
                "cannot open '" + path.string() + "'");
  }
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    parse_error("'" + path.string() + "': " + e.what());
  }
}

MarkovChain chain_from_json(const Json& j) {
  const Json& rows = member(j, "transition", "chain");
  if (!rows.is_array() || rows.empty()) {
    parse_error("\"transition\" must be a nonempty array of rows");
  }
  const auto n = static_cast<Eigen::Index>(rows.size());
  Matrix p(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto row = number_list(rows[static_cast<std::size_t>(i)],
                                 "transition row");
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw Error(ErrorCode::NotSquare, "transition matrix must be square");
    }
    for (Eigen::Index k = 0; k < n; ++k) {
      p(i, k) = row[static_cast<std::size_t>(k)];
    }
  }
  std::optional<Vector> initial;
  if (j.contains("initial") && !j.at("initial").is_null()) {
    const auto q = number_list(j.at("initial"), "initial");
    initial = Eigen::Map<const Vector>(q.data(),
                                       static_cast<Eigen::Index>(q.size()));
  }
  std::vector<std::string> labels;
  if (j.contains("states") && !j.at("states").is_null()) {
    for (const auto& s : j.at("states")) {
      if (!s.is_string()) parse_error("state labels must be strings");
      labels.push_back(s.get<std::string>());
    }
  }
  return MarkovChain::validate(p, std::move(initial), std::move(labels));
}

Json chain_to_json(const MarkovChain& chain) {
  Json j = Json::object();
  if (!chain.labels().empty()) j["states"] = chain.labels();
  Json rows = Json::array();
  for (State x = 0; x < chain.n_states(); ++x) {
    Json row = Json::array();
    for (State y = 0; y < chain.n_states(); ++y) row.push_back(chain.prob(x, y));
    rows.push_back(std::move(row));
  }
  j["transition"] = std::move(rows);
  if (chain.initial()) {
    const Vector& q = *chain.initial();
    j["initial"] = std::vector<double>(q.data(), q.data() + q.size());
  }
  return j;
}

MarkovChain load_chain(const std::filesystem::path& path) {
  return chain_from_json(load_json(path));
}

RewardFunction reward_from_json(const Json& j) {
  return RewardFunction(number_list(member(j, "values", "reward"), "values"),
                        number(member(j, "lower", "reward"), "lower"),
                        number(member(j, "upper", "reward"), "upper"));
}

RewardFunction load_reward(const std::filesystem::path& path) {
  return reward_from_json(load_json(path));
}

PairRewardFunction pair_reward_from_json(const Json& j) {
  PairRewardFunction f2;
  f2.lower = number(member(j, "lower", "pair reward"), "lower");
  f2.upper = number(member(j, "upper", "pair reward"), "upper");
  const Json& pairs = member(j, "pairs", "pair reward");
  if (!pairs.is_array()) parse_error("\"pairs\" must be an array");
  for (const auto& entry : pairs) {
    if (!entry.is_array() || entry.size() != 3) {
      parse_error("each pair entry must be [from, to, value]");
    }
    const Transition key{state_index(entry[0]), state_index(entry[1])};
    if (!f2.values.emplace(key, number(entry[2], "pair value")).second) {
      parse_error("duplicate pair entry");
    }
  }
  return f2;
}

PairRewardFunction load_pair_reward(const std::filesystem::path& path) {
  return pair_reward_from_json(load_json(path));
}

BanditInstance instance_from_json(const Json& j) {
  RewardFunction reward = reward_from_json(member(j, "reward", "instance"));
  const Json& arms = member(j, "arms", "instance");
  if (!arms.is_array()) parse_error("\"arms\" must be an array");
  std::vector<MarkovChain> chains;
  for (const auto& a : arms) chains.push_back(chain_from_json(a));
  return BanditInstance(std::move(chains), std::move(reward));
}

BanditInstance load_instance(const std::filesystem::path& path) {
  return instance_from_json(load_json(path));
}

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

std::string dump(const Json& j, int indent) {
  std::string out;
  write_json(out, j, indent, 0);
  return out;
}

}  // namespace mhb::io

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"

#include "mhb/bandits.hpp"
#include "mhb/chain.hpp"

namespace mhb::io {

using Json = nlohmann::ordered_json;

/// Reads and parses a JSON file. Throws FileNotFound or ConfigParse.
Json load_json(const std::filesystem::path& path);

/// { "states": [...]?, "transition": [[...]], "initial": [...]? }
MarkovChain chain_from_json(const Json& j);
Json chain_to_json(const MarkovChain& chain);
MarkovChain load_chain(const std::filesystem::path& path);

/// { "values": [...], "lower": a, "upper": b }
RewardFunction reward_from_json(const Json& j);
RewardFunction load_reward(const std::filesystem::path& path);

/// { "pairs": [[x, y, value], ...], "lower": a, "upper": b }
PairRewardFunction pair_reward_from_json(const Json& j);
PairRewardFunction load_pair_reward(const std::filesystem::path& path);

/// { "reward": {...}, "arms": [chain objects...] }
BanditInstance instance_from_json(const Json& j);
BanditInstance load_instance(const std::filesystem::path& path);

/// "%.17g", the round-trip float format for every output file.
std::string format_double(double value);

/// Serializes like Json::dump but writes floats through format_double and
/// non-finite floats as the strings "inf", "-inf", "nan".
std::string dump(const Json& j, int indent = -1);

}  // namespace mhb::io

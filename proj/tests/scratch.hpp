#pragma once

#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include "mhb/io.hpp"

namespace mhb::test {

/// Temporary directory removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("mhb_" + tag + "_" + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const noexcept { return path_; }

  std::filesystem::path write(const std::string& name, const io::Json& j) const {
    return write_text(name, io::dump(j, 2));
  }

  std::filesystem::path write_text(const std::string& name, const std::string& text) const {
    const auto p = path_ / name;
    std::ofstream(p) << text;
    return p;
  }

 private:
  std::filesystem::path path_;
};

inline std::string read_text(const std::filesystem::path& p) {
  std::ifstream in(p);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

/// {"transition": [[1-p, p], [r, 1-r]]}.
inline io::Json two_state_json(double p, double r) {
  return io::Json{{"transition", {{1.0 - p, p}, {r, 1.0 - r}}}};
}

inline io::Json indicator_reward_json() {
  return io::Json{{"values", {0.0, 1.0}}, {"lower", 0.0}, {"upper", 1.0}};
}

/// Arms of the four-arm test instance, means 0.8, 0.5, 0.4, 0.2.
inline io::Json standard_instance_json() {
  return io::Json{{"reward", indicator_reward_json()},
                  {"arms",
                   {two_state_json(1.0, 0.25), two_state_json(1.0, 1.0),
                    two_state_json(2.0 / 3.0, 1.0), two_state_json(0.25, 1.0)}}};
}

}  // namespace mhb::test

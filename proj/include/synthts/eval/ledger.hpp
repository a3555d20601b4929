#ifndef SYNTHTS_EVAL_LEDGER_HPP
#define SYNTHTS_EVAL_LEDGER_HPP

#include <filesystem>
#include <fstream>
#include <mutex>
#include <string>

#include "synthts/eval/protocols.hpp"

namespace synthts::eval {

// Append-only JSONL log of finished training runs with wall-clock times.
// Lives in $SYNTHTS_BENCH_CACHE when set, else in `fallback`.
class RunLedger {
 public:
  RunLedger(const std::filesystem::path& fallback, std::string config_hash);

  void append(const RunRecord& record);
  const std::filesystem::path& path() const { return path_; }

  static std::filesystem::path directory(const std::filesystem::path& fallback);

 private:
  std::filesystem::path path_;
  std::string config_hash_;
  std::mutex mutex_;
  std::ofstream out_;
};

}  // namespace synthts::eval

#endif  // SYNTHTS_EVAL_LEDGER_HPP

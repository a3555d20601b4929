#include "synthts/eval/ledger.hpp"

#include <chrono>
#include <cstdlib>
#include <ctime>

#include <json.hpp>

#include "synthts/core/error.hpp"

namespace synthts::eval {

std::filesystem::path RunLedger::directory(const std::filesystem::path& fallback) {
  if (const char* env = std::getenv("SYNTHTS_BENCH_CACHE"); env && *env) return env;
  return fallback;
}

RunLedger::RunLedger(const std::filesystem::path& fallback, std::string config_hash)
    : path_(directory(fallback) / "runs.jsonl"), config_hash_(std::move(config_hash)) {
  std::filesystem::create_directories(path_.parent_path());
  out_.open(path_, std::ios::app);
  if (!out_) throw DataError(path_.string() + ": cannot open run ledger");
}

void RunLedger::append(const RunRecord& r) {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm);
  nlohmann::json j = {{"time", stamp},
                      {"config_hash", config_hash_},
                      {"protocol", r.protocol},
                      {"classifier", nn::to_string(r.classifier)},
                      {"seed", r.seed},
                      {"class_id", r.class_id ? nlohmann::json(*r.class_id) : nlohmann::json(nullptr)},
                      {"value", r.value},
                      {"seconds", r.seconds}};
  std::lock_guard lock(mutex_);
  out_ << j.dump() << '\n';
  out_.flush();
}

}  // namespace synthts::eval

#pragma once

// Request handlers shared by the CLI and the HTTP service, so both emit the
// same documents for the same request.

#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "pooldesign/decode.hpp"
#include "pooldesign/evaluate.hpp"
#include "pooldesign/prevalence.hpp"
#include "pooldesign/serialize.hpp"
#include "pooldesign/sweep.hpp"

namespace pooldesign::api {

inline constexpr std::string_view kSessionSchemaVersion = "pooldesign.session/1";

int exit_code(ErrorCode code);
int http_status(ErrorCode code);
Json error_json(ErrorCode code, const std::string& message, const Json& details = Json::object());

/// Runs `f`, translating JSON access errors into InputError.
Json guarded(const std::function<Json()>& f);

Json methods_json();

/// {method, samples, differentiate?, dims?, seed?}
PoolingDesign design_from_request(const Json& req);

Json to_json(const DecodeOutcome& outcome);
/// {design, results, round?}; `round` defaults to the design's first round.
Json decode_request(const Json& req);

Json to_json(const SessionState& state);
SessionState session_from_json(const Json& doc);
/// What an operator needs next: status, the pending round, or the result.
Json session_view(const std::string& id, const SessionState& state);

/// FNV-1a 64-bit, lower-case hex.
std::string fnv1a_hex(std::string_view data);

/// Disk-backed sessions, one JSON file per id. Writes to one id are
/// serialized; distinct ids proceed concurrently.
class SessionStore {
 public:
  explicit SessionStore(std::filesystem::path dir);

  std::pair<std::string, SessionState> create(const PoolingDesign& design);
  SessionState load(const std::string& id) const;
  SessionState submit(const std::string& id, const std::vector<bool>& outcomes);

  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path path_of(const std::string& id) const;
  std::shared_ptr<std::mutex> lock_for(const std::string& id);

  std::filesystem::path dir_;
  std::mutex table_mutex_;
  std::map<std::string, std::shared_ptr<std::mutex>> locks_;
};

struct CompareQuery {
  std::size_t samples = 0;
  int differentiate = 1;
  std::optional<std::size_t> max_group_size;
  std::optional<std::size_t> max_steps;
};

/// Every comparison method supporting D, with metrics; rows violating a
/// constraint or without a design are listed under "excluded".
Json compare(const CompareQuery& q, const EvaluateOptions& eval = {}, const BuildOptions& build = {});
std::string compare_csv(const Json& table);
std::string compare_text(const Json& table);

Json error_rate_request(const Json& req);
Json recommend_request(const Json& req);

/// Reads metrics.csv under `root` and applies a filter string.
Json sweep_query(const std::filesystem::path& root, const std::string& filter);

}  // namespace pooldesign::api

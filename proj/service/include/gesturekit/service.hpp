#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "gesturekit/classifier.hpp"
#include "gesturekit/model.hpp"
#include "gesturekit/trace.hpp"

namespace httplib {
class Server;
}

namespace gesturekit::service {

/// Minimum training samples per gesture unless a session overrides it.
inline constexpr std::size_t kDefaultMinSamples = 10;

struct SessionConfig {
  double thr = 0.5;
  QuantizerKind quantizer = QuantizerKind::kStatisticalGmm;
  /// Relative frequency weights by label; unlisted gestures weigh 1.
  std::map<std::string, double> priors;
  double alpha = 0.1;
  std::size_t max_samples = 1000;
  std::size_t min_samples = kDefaultMinSamples;
  std::uint64_t seed = 0;
};

enum class ClassifyMode { kSignaled, kDeadStart };

/// One classified trace, kept so metrics can be recomputed at any threshold.
struct HistoryEntry {
  ClassifyMode mode = ClassifyMode::kSignaled;
  /// Known true label (signaled mode with `expected`); dead-start traces have none.
  std::optional<std::string> expected;
  /// Full sample stream for statistical classifications.
  std::optional<SampleRecord> record;
  /// Decision for deterministic classifications.
  std::optional<std::size_t> decision;
  HypothesisConfig hypothesis{};
};

struct Session {
  std::string id;
  std::vector<std::string> gestures;  // registration order
  std::map<std::string, std::vector<Trace>> samples;
  std::shared_ptr<const std::vector<GestureModel>> models;
  bool stale = false;
  SessionConfig config;
  std::vector<HistoryEntry> history;
  // Single writer per session; classification works on a snapshot.
  mutable std::mutex mutex;
};

struct Response {
  int status = 200;
  std::string body;  // JSON
};

/// In-memory session store plus the JSON routes. `handle` does all the work so
/// it can be exercised without sockets; `mount` wires it into an httplib server.
class Api {
 public:
  Response handle(const std::string& method, const std::string& path, const std::string& body,
                  const std::multimap<std::string, std::string>& query = {});

  std::size_t session_count() const;

 private:
  std::shared_ptr<Session> find(const std::string& id) const;

  Response create_session(const std::string& body);
  Response get_session(Session& s);
  Response add_gesture(Session& s, const std::string& body);
  Response add_sample(Session& s, const std::string& label, const std::string& body);
  Response train(Session& s, const std::string& body);
  Response classify(Session& s, const std::string& body);
  Response get_config(Session& s);
  Response patch_config(Session& s, const std::string& body);
  Response metrics(Session& s, const std::multimap<std::string, std::string>& query);
  Response models(Session& s);

  mutable std::shared_mutex mutex_;
  std::map<std::string, std::shared_ptr<Session>> sessions_;
  std::uint64_t next_id_ = 1;
};

/// Routes every request under /sessions to `api` (plus CORS preflight).
void mount(httplib::Server& server, Api& api);

}  // namespace gesturekit::service

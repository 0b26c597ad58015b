#ifndef ASSIST_TRANSPORT_H_
#define ASSIST_TRANSPORT_H_

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <memory>
#include <mutex>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <thread>
#include <vector>

#include "json.hpp"

#include "assist/core.h"
#include "assist/errors.h"

namespace assist {

using Json = nlohmann::json;

inline constexpr int kProtocolVersion = 1;

enum class MessageKind {
  kFitRequest,
  kFitResponse,
  kPredictRequest,
  kPredictResponse,
  kPartialPreact,
  kWtildeTransfer,
  kLabelsTransfer,
  kNnPredictRequest,
  kNnPredictResponse,
  kRefuse,
  kError,
};

std::string_view message_kind_name(MessageKind kind);
// Throws MalformedMessage on an unknown name.
MessageKind message_kind_from_name(std::string_view name);

struct Envelope {
  int version = kProtocolVersion;
  MessageKind kind = MessageKind::kError;
  std::string task_id;
  int round = 0;
  std::string sender;
  std::string receiver;
  Json payload = Json::object();

  friend bool operator==(const Envelope&, const Envelope&) = default;
};

// FIT_* and PREDICT_* payloads may only carry ids, flat value vectors and
// round numbers; REFUSE carries nothing and ERROR a code and a message.
// Anything else, in particular a 2-D array, throws MalformedMessage. The
// split-network kinds are exempt: their partials are n x h by design.
void check_payload_schema(MessageKind kind, const Json& payload);

// One JSON object plus '\n'. Throws NonFinitePayload on NaN/Inf anywhere in
// the payload and MalformedMessage on a schema violation.
std::string encode(const Envelope& envelope);

// Accepts one line, with or without its trailing newline. Throws
// MalformedMessage (including schema violations) or UnsupportedVersion.
Envelope decode(std::string_view line);

// Payload helpers. Ids travel as strings, vectors as flat number arrays,
// matrices as arrays of rows.
Json ids_to_json(std::span<const SampleId> ids);
IdList ids_from_json(const Json& array);
Json vector_to_json(const Vector& values);
Vector vector_from_json(const Json& array);
Json matrix_to_json(const Matrix& m);
Matrix matrix_from_json(const Json& rows, Eigen::Index expected_cols = -1);

Envelope make_error_reply(const Envelope& request, ErrorCode code,
                          std::string_view message);

// Returns the reply if it has the expected kind; turns REFUSE into
// AssistantRefused and ERROR into an Error carrying the peer's code.
const Envelope& expect_reply(const Envelope& reply, MessageKind expected);

// Synchronous request/response link to one responder.
class Channel {
 public:
  virtual ~Channel() = default;
  virtual Envelope request(const Envelope& envelope) = 0;
};

class ModuleService;

// Calls the responder directly in the caller's thread.
class InProcessChannel final : public Channel {
 public:
  explicit InProcessChannel(std::shared_ptr<ModuleService> service);
  Envelope request(const Envelope& envelope) override;

 private:
  std::shared_ptr<ModuleService> service_;
};

inline constexpr std::chrono::milliseconds kDefaultTimeout{30000};

// One TCP connection per request; no retries (FIT requests are stateful).
class TcpChannel final : public Channel {
 public:
  TcpChannel(std::string host, std::uint16_t port,
             std::chrono::milliseconds timeout = kDefaultTimeout);
  Envelope request(const Envelope& envelope) override;

  // Sends raw bytes and reads one reply line. Exposed for robustness tests.
  std::string exchange_raw(std::string_view bytes);

 private:
  std::string host_;
  std::uint16_t port_;
  std::chrono::milliseconds timeout_;
};

struct Endpoint {
  std::string module_id;
  std::shared_ptr<Channel> channel;
};

// "host:port" -> (host, port). Throws InvalidArgument.
std::pair<std::string, std::uint16_t> parse_host_port(std::string_view text);

Endpoint tcp_endpoint(std::string module_id, std::string_view host_port,
                      std::chrono::milliseconds timeout = kDefaultTimeout);

Envelope request(const Endpoint& endpoint, const Envelope& envelope);

// Accept loop plus one reader thread per connection. Each connection is a
// sequence of request lines answered in order.
class TcpServer {
 public:
  // port 0 picks an ephemeral port. Throws BindFailure.
  TcpServer(std::shared_ptr<ModuleService> service, const std::string& host,
            std::uint16_t port);
  ~TcpServer();

  TcpServer(const TcpServer&) = delete;
  TcpServer& operator=(const TcpServer&) = delete;

  std::uint16_t port() const noexcept { return port_; }
  std::string address() const;
  void stop();
  // Blocks until stop() from another thread.
  void wait();

 private:
  void accept_loop();
  void serve_connection(int fd);

  std::shared_ptr<ModuleService> service_;
  std::string host_;
  std::uint16_t port_ = 0;
  int listen_fd_ = -1;
  std::atomic<bool> stopping_{false};
  std::thread accept_thread_;
  std::mutex conn_mu_;
  std::condition_variable conn_cv_;
  std::set<int> conn_fds_;  // open connections, shut down by stop()
  int active_ = 0;
  bool stopped_ = false;
};

}  // namespace assist

#endif  // ASSIST_TRANSPORT_H_

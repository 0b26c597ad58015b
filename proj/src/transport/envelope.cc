#include <algorithm>
#include <array>
#include <cmath>
#include <utility>
#include <vector>

#include "assist/service.h"
#include "assist/transport.h"

namespace assist {

namespace {

constexpr std::array<std::pair<MessageKind, std::string_view>, 11> kKindNames{{
    {MessageKind::kFitRequest, "FIT_REQUEST"},
    {MessageKind::kFitResponse, "FIT_RESPONSE"},
    {MessageKind::kPredictRequest, "PREDICT_REQUEST"},
    {MessageKind::kPredictResponse, "PREDICT_RESPONSE"},
    {MessageKind::kPartialPreact, "PARTIAL_PREACT"},
    {MessageKind::kWtildeTransfer, "WTILDE_TRANSFER"},
    {MessageKind::kLabelsTransfer, "LABELS_TRANSFER"},
    {MessageKind::kNnPredictRequest, "NN_PREDICT_REQUEST"},
    {MessageKind::kNnPredictResponse, "NN_PREDICT_RESPONSE"},
    {MessageKind::kRefuse, "REFUSE"},
    {MessageKind::kError, "ERROR"},
}};

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::kMalformedMessage, what);
}

void check_finite(const Json& j) {
  if (j.is_number_float()) {
    if (!std::isfinite(j.get<double>())) {
      throw Error(ErrorCode::kNonFinitePayload, "NaN or Inf in payload");
    }
  } else if (j.is_structured()) {
    for (const auto& item : j) check_finite(item);
  }
}

const Json& field(const Json& obj, const char* name) {
  auto it = obj.find(name);
  if (it == obj.end()) malformed(std::string("missing field '") + name + "'");
  return *it;
}

std::string string_field(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_string()) malformed(std::string("field '") + name + "' must be a string");
  return v.get<std::string>();
}

int int_field(const Json& obj, const char* name) {
  const Json& v = field(obj, name);
  if (!v.is_number_integer()) malformed(std::string("field '") + name + "' must be an integer");
  const auto value = v.get<std::int64_t>();
  if (value < INT32_MIN || value > INT32_MAX) {
    malformed(std::string("field '") + name + "' out of range");
  }
  return static_cast<int>(value);
}

bool is_string_array(const Json& j) {
  return j.is_array() && std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_string(); });
}

bool is_number_array(const Json& j) {
  return j.is_array() && std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number(); });
}

bool is_integer_array(const Json& j) {
  return j.is_array() &&
         std::all_of(j.begin(), j.end(), [](const Json& v) { return v.is_number_integer(); });
}

}  // namespace

void check_payload_schema(MessageKind kind, const Json& payload) {
  using Check = bool (*)(const Json&);
  struct Field {
    std::string_view name;
    Check check;
  };
  const auto is_string = [](const Json& j) { return j.is_string(); };
  std::vector<Field> allowed;
  switch (kind) {
    case MessageKind::kFitRequest:
    case MessageKind::kFitResponse:
    case MessageKind::kPredictResponse:
      allowed = {{"ids", is_string_array}, {"values", is_number_array}};
      break;
    case MessageKind::kPredictRequest:
      allowed = {{"ids", is_string_array}, {"rounds", is_integer_array}};
      break;
    case MessageKind::kRefuse:
      break;
    case MessageKind::kError:
      allowed = {{"code", is_string}, {"message", is_string}};
      break;
    default:
      return;
  }
  if (!payload.is_object()) malformed("payload must be an object");
  for (auto it = payload.begin(); it != payload.end(); ++it) {
    auto f = std::find_if(allowed.begin(), allowed.end(),
                          [&](const Field& a) { return a.name == it.key(); });
    if (f == allowed.end()) {
      malformed("field '" + it.key() + "' is not allowed in " +
                std::string(message_kind_name(kind)));
    }
    if (!f->check(*it)) {
      malformed("field '" + it.key() + "' has the wrong shape for " +
                std::string(message_kind_name(kind)));
    }
  }
}

std::string_view message_kind_name(MessageKind kind) {
  for (const auto& [k, name] : kKindNames) {
    if (k == kind) return name;
  }
  return "ERROR";
}

MessageKind message_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKindNames) {
    if (n == name) return k;
  }
  malformed("unknown message kind '" + std::string(name) + "'");
}

std::string encode(const Envelope& envelope) {
  check_finite(envelope.payload);
  check_payload_schema(envelope.kind, envelope.payload);
  Json j = {
      {"v", envelope.version},
      {"kind", message_kind_name(envelope.kind)},
      {"task", envelope.task_id},
      {"round", envelope.round},
      {"from", envelope.sender},
      {"to", envelope.receiver},
      {"payload", envelope.payload},
  };
  std::string line = j.dump(-1, ' ', false, Json::error_handler_t::replace);
  line.push_back('\n');
  return line;
}

Envelope decode(std::string_view line) {
  if (!line.empty() && line.back() == '\n') line.remove_suffix(1);
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  if (line.find('\n') != std::string_view::npos) malformed("more than one line");

  Json j = Json::parse(line.begin(), line.end(), nullptr, false);
  if (j.is_discarded()) malformed("not valid JSON");
  if (!j.is_object()) malformed("envelope must be a JSON object");

  Envelope e;
  e.version = int_field(j, "v");
  if (e.version != kProtocolVersion) {
    throw Error(ErrorCode::kUnsupportedVersion, "protocol version " + std::to_string(e.version));
  }
  e.kind = message_kind_from_name(string_field(j, "kind"));
  e.task_id = string_field(j, "task");
  e.round = int_field(j, "round");
  e.sender = string_field(j, "from");
  e.receiver = string_field(j, "to");
  e.payload = field(j, "payload");
  if (!e.payload.is_object()) malformed("payload must be an object");
  check_payload_schema(e.kind, e.payload);
  for (auto it = j.begin(); it != j.end(); ++it) {
    static constexpr std::array<std::string_view, 7> kKnown{"v", "kind", "task", "round",
                                                            "from", "to", "payload"};
    if (std::find(kKnown.begin(), kKnown.end(), it.key()) == kKnown.end()) {
      malformed("unknown envelope field '" + it.key() + "'");
    }
  }
  return e;
}

Json ids_to_json(std::span<const SampleId> ids) {
  Json out = Json::array();
  for (const SampleId& id : ids) out.push_back(id.value());
  return out;
}

IdList ids_from_json(const Json& array) {
  if (!array.is_array()) malformed("ids must be an array");
  IdList ids;
  ids.reserve(array.size());
  for (const Json& item : array) {
    if (!item.is_string() || item.get_ref<const std::string&>().empty()) {
      malformed("ids must be non-empty strings");
    }
    ids.emplace_back(item.get<std::string>());
  }
  return ids;
}

Json vector_to_json(const Vector& values) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < values.size(); ++i) out.push_back(values[i]);
  return out;
}

Vector vector_from_json(const Json& array) {
  if (!array.is_array()) malformed("expected a number array");
  Vector out(static_cast<Eigen::Index>(array.size()));
  Eigen::Index i = 0;
  for (const Json& item : array) {
    if (!item.is_number()) malformed("expected a number array");
    out[i++] = item.get<double>();
  }
  return out;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    Json row = Json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Matrix matrix_from_json(const Json& rows, Eigen::Index expected_cols) {
  if (!rows.is_array()) malformed("matrix must be an array of rows");
  Eigen::Index cols = expected_cols;
  if (cols < 0) cols = rows.empty() ? 0 : static_cast<Eigen::Index>(rows.front().size());
  Matrix m(static_cast<Eigen::Index>(rows.size()), cols);
  Eigen::Index r = 0;
  for (const Json& row : rows) {
    if (!row.is_array()) malformed("matrix must be an array of rows");
    if (static_cast<Eigen::Index>(row.size()) != cols) {
      throw Error(ErrorCode::kShapeMismatch, "matrix row " + std::to_string(r) + " has " +
                                                 std::to_string(row.size()) + " entries, expected " +
                                                 std::to_string(cols));
    }
    Eigen::Index c = 0;
    for (const Json& v : row) {
      if (!v.is_number()) malformed("matrix entries must be numbers");
      m(r, c++) = v.get<double>();
    }
    ++r;
  }
  return m;
}

Envelope make_error_reply(const Envelope& request, ErrorCode code,
                          std::string_view message) {
  Envelope reply;
  reply.kind = MessageKind::kError;
  reply.task_id = request.task_id;
  reply.round = request.round;
  reply.sender = request.receiver;
  reply.receiver = request.sender;
  reply.payload = {{"code", error_code_name(code)}, {"message", message}};
  return reply;
}

const Envelope& expect_reply(const Envelope& reply, MessageKind expected) {
  if (reply.kind == expected) return reply;
  if (reply.kind == MessageKind::kRefuse) {
    throw Error(ErrorCode::kAssistantRefused,
                "'" + reply.sender + "' declined round " + std::to_string(reply.round));
  }
  if (reply.kind == MessageKind::kError) {
    const Json& p = reply.payload;
    const std::string code = p.contains("code") && p["code"].is_string()
                                 ? p["code"].get<std::string>()
                                 : std::string("TransportError");
    const std::string message = p.contains("message") && p["message"].is_string()
                                    ? p["message"].get<std::string>()
                                    : std::string();
    throw Error(error_code_from_name(code), "from '" + reply.sender + "': " + message);
  }
  malformed("expected " + std::string(message_kind_name(expected)) + ", got " +
            std::string(message_kind_name(reply.kind)));
}

InProcessChannel::InProcessChannel(std::shared_ptr<ModuleService> service)
    : service_(std::move(service)) {}

// Goes through the wire encoding so both transports share one contract.
Envelope InProcessChannel::request(const Envelope& envelope) {
  return decode(service_->handle_line(encode(envelope)));
}

Envelope request(const Endpoint& endpoint, const Envelope& envelope) {
  if (!endpoint.channel) {
    throw Error(ErrorCode::kTransportError, "endpoint '" + endpoint.module_id + "' has no channel");
  }
  return endpoint.channel->request(envelope);
}

}  // namespace assist

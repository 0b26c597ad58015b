#include <gtest/gtest.h>

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <thread>

#include "assist/data.h"
#include "assist/errors.h"
#include "assist/protocol.h"
#include "assist/service.h"
#include "test_util.h"

namespace assist {
namespace {

using testing::make_module;
using testing::random_matrix;

template <typename F>
ErrorCode code_of(F&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "expected an assist::Error";
  return ErrorCode::kInvalidArgument;
}

// Pieces are whole code points, so the result is always valid UTF-8.
std::string random_token(Engine& rng, int max_len) {
  static const std::vector<std::string> kPieces{"a", "b", "X", "Z", "0", "9", "_", "-", ".",
                                                "/", " ", "\"", "\\", "\t", "\xc3\xa9"};
  const int len = static_cast<int>(uniform01(rng) * max_len);
  std::string s;
  for (int i = 0; i < len; ++i) {
    s += kPieces[static_cast<std::size_t>(uniform01(rng) * kPieces.size())];
  }
  return s;
}

double random_double(Engine& rng) {
  switch (static_cast<int>(uniform01(rng) * 4)) {
    case 0:
      return standard_normal(rng);
    case 1:
      return std::ldexp(standard_normal(rng), static_cast<int>(uniform01(rng) * 200) - 100);
    case 2:
      return std::numeric_limits<double>::denorm_min() * (1 + uniform01(rng) * 1000);
    default:
      return std::round(standard_normal(rng) * 1000);
  }
}

Envelope random_envelope(Engine& rng) {
  Envelope e;
  e.kind = static_cast<MessageKind>(static_cast<int>(uniform01(rng) * 11));
  e.task_id = random_token(rng, 12);
  e.round = static_cast<int>(uniform01(rng) * 1000) - 10;
  e.sender = random_token(rng, 8);
  e.receiver = random_token(rng, 8);
  const int n = static_cast<int>(uniform01(rng) * 6);
  switch (e.kind) {
    case MessageKind::kFitRequest:
    case MessageKind::kFitResponse:
    case MessageKind::kPredictResponse: {
      Json ids = Json::array(), values = Json::array();
      for (int i = 0; i < n; ++i) {
        ids.push_back("id" + random_token(rng, 5));
        values.push_back(random_double(rng));
      }
      e.payload = {{"ids", ids}, {"values", values}};
      break;
    }
    case MessageKind::kPredictRequest: {
      Json rounds = Json::array();
      for (int i = 0; i < n; ++i) rounds.push_back(i + 1);
      e.payload = {{"ids", Json::array({"a", "b"})}, {"rounds", rounds}};
      break;
    }
    case MessageKind::kRefuse:
      break;
    case MessageKind::kError:
      e.payload = {{"code", "Timeout"}, {"message", random_token(rng, 20)}};
      break;
    default: {
      Json rows = Json::array();
      for (int i = 0; i < n; ++i) rows.push_back({random_double(rng), random_double(rng)});
      e.payload = {{"matrix", rows}, {"hidden", n}, {"flag", uniform01(rng) < 0.5}};
      break;
    }
  }
  return e;
}

TEST(Codec, RoundTripsRandomEnvelopes) {
  for (std::uint64_t seed = 0; seed < 500; ++seed) {
    Engine rng = make_engine(seed);
    const Envelope e = random_envelope(rng);
    const std::string line = encode(e);
    ASSERT_EQ(line.back(), '\n');
    ASSERT_EQ(line.find('\n'), line.size() - 1) << "seed " << seed;
    EXPECT_EQ(decode(line), e) << "seed " << seed << ": " << line;
  }
}

// Shortest round-trip rendering: the decimal text parses back to the same
// 64-bit pattern, and 0.1 is printed as "0.1".
TEST(Codec, FloatsSurviveBitForBit) {
  Envelope e;
  e.kind = MessageKind::kFitRequest;
  e.payload = {{"ids", {"a"}}, {"values", {0.1}}};
  const std::string line = encode(e);
  EXPECT_NE(line.find("[0.1]"), std::string::npos) << line;
  const double back = decode(line).payload["values"][0].get<double>();
  std::uint64_t a, b;
  const double tenth = 0.1;
  std::memcpy(&a, &tenth, 8);
  std::memcpy(&b, &back, 8);
  EXPECT_EQ(a, b);

  const double specials[] = {1.0 / 3.0, -0.0, 5e-324, 1.7976931348623157e308, 123456789.123456789};
  for (double v : specials) {
    e.payload["values"] = {v};
    const double got = decode(encode(e)).payload["values"][0].get<double>();
    std::memcpy(&a, &v, 8);
    std::memcpy(&b, &got, 8);
    EXPECT_EQ(a, b) << v;
  }
}

TEST(Codec, RefuseIsOneMinimalLine) {
  Envelope e;
  e.kind = MessageKind::kRefuse;
  e.task_id = "t";
  e.round = 3;
  e.sender = "m1";
  e.receiver = "alice";
  const std::string line = encode(e);
  EXPECT_EQ(line,
            "{\"from\":\"m1\",\"kind\":\"REFUSE\",\"payload\":{},\"round\":3,\"task\":\"t\","
            "\"to\":\"alice\",\"v\":1}\n");
}

TEST(Codec, RejectsBadLines) {
  Envelope e;
  e.kind = MessageKind::kFitRequest;
  e.payload = {{"ids", {"a"}}, {"values", {1.5}}};
  const std::string line = encode(e);
  EXPECT_EQ(code_of([&] { decode(line.substr(0, line.size() / 2)); }),
            ErrorCode::kMalformedMessage);
  EXPECT_EQ(code_of([&] { decode(""); }), ErrorCode::kMalformedMessage);
  EXPECT_EQ(code_of([&] { decode("[1,2]"); }), ErrorCode::kMalformedMessage);

  Json j = Json::parse(line);
  j["v"] = 2;
  EXPECT_EQ(code_of([&] { decode(j.dump()); }), ErrorCode::kUnsupportedVersion);
  j = Json::parse(line);
  j["kind"] = "GOSSIP";
  EXPECT_EQ(code_of([&] { decode(j.dump()); }), ErrorCode::kMalformedMessage);
  j = Json::parse(line);
  j["extra"] = 1;
  EXPECT_EQ(code_of([&] { decode(j.dump()); }), ErrorCode::kMalformedMessage);
  j = Json::parse(line);
  j.erase("task");
  EXPECT_EQ(code_of([&] { decode(j.dump()); }), ErrorCode::kMalformedMessage);
  j = Json::parse(line);
  j["round"] = 1.5;
  EXPECT_EQ(code_of([&] { decode(j.dump()); }), ErrorCode::kMalformedMessage);
  EXPECT_EQ(code_of([&] { decode(line + line); }), ErrorCode::kMalformedMessage);

  // CRLF framing is tolerated.
  EXPECT_EQ(decode(line.substr(0, line.size() - 1) + "\r\n"), e);
}

TEST(Codec, RejectsNonFinitePayloads) {
  Envelope e;
  e.kind = MessageKind::kFitRequest;
  e.payload = {{"ids", {"a", "b"}}, {"values", {1.0, std::nan("")}}};
  EXPECT_EQ(code_of([&] { encode(e); }), ErrorCode::kNonFinitePayload);
  e.kind = MessageKind::kPartialPreact;
  e.payload = {{"matrix", {{1.0, std::numeric_limits<double>::infinity()}}}};
  EXPECT_EQ(code_of([&] { encode(e); }), ErrorCode::kNonFinitePayload);
}

// FIT and PREDICT payloads cannot carry anything shaped like a feature
// matrix, in either direction.
TEST(Schema, ConfinesFitAndPredictPayloads) {
  const MessageKind confined[] = {MessageKind::kFitRequest, MessageKind::kFitResponse,
                                  MessageKind::kPredictRequest, MessageKind::kPredictResponse};
  const Json smuggled[] = {
      Json{{"ids", {"a"}}, {"values", {1.0}}, {"features", {{1.0, 2.0}}}},
      Json{{"ids", {"a"}}, {"values", {{1.0, 2.0}}}},
      Json{{"ids", {{"a", "b"}}}, {"values", {1.0}}},
      Json{{"ids", {"a"}}, {"rounds", {{1, 2}}}},
      Json{{"x", {{0.5}}}},
  };
  for (MessageKind kind : confined) {
    for (const Json& payload : smuggled) {
      Envelope e;
      e.kind = kind;
      e.payload = payload;
      EXPECT_EQ(code_of([&] { encode(e); }), ErrorCode::kMalformedMessage)
          << message_kind_name(kind) << " " << payload.dump();
      const std::string raw = "{\"v\":1,\"kind\":\"" + std::string(message_kind_name(kind)) +
                              "\",\"task\":\"t\",\"round\":1,\"from\":\"a\",\"to\":\"b\","
                              "\"payload\":" + payload.dump() + "}";
      EXPECT_EQ(code_of([&] { decode(raw); }), ErrorCode::kMalformedMessage) << raw;
    }
  }
  Envelope refuse;
  refuse.kind = MessageKind::kRefuse;
  refuse.payload = {{"reason", "busy"}};
  EXPECT_EQ(code_of([&] { encode(refuse); }), ErrorCode::kMalformedMessage);
}

// Every field the protocol actually puts in a FIT or PREDICT payload is an
// id list or a flat number list.
TEST(Schema, LiveTrafficIsFlat) {
  Engine rng = make_engine(3);
  const IdList ids = row_ids(20);
  auto module = make_module("m1", ids, random_matrix(rng, 20, 3), LearnerSpec::least_squares());
  auto service = std::make_shared<ModuleService>(module);
  ResidualMessage msg;
  msg.task_id = "t";
  msg.round = 1;
  msg.sender = "alice";
  msg.receiver = "m1";
  msg.ids = ids;
  msg.values = testing::random_vector(rng, 20);
  Envelope predict;
  predict.kind = MessageKind::kPredictRequest;
  predict.task_id = "t";
  predict.receiver = "m1";
  predict.payload = {{"ids", ids_to_json(ids)}, {"rounds", {1}}};
  for (const Envelope& req : {msg.to_envelope(MessageKind::kFitRequest), predict}) {
    const Envelope reply = decode(service->handle_line(encode(req)));
    for (const Envelope* e : {&req, &reply}) {
      ASSERT_TRUE(e->kind == req.kind || e->kind == MessageKind::kFitResponse ||
                  e->kind == MessageKind::kPredictResponse);
      for (auto it = e->payload.begin(); it != e->payload.end(); ++it) {
        ASSERT_TRUE(it->is_array()) << it.key();
        for (const Json& v : *it) EXPECT_FALSE(v.is_structured()) << it.key();
      }
    }
  }
}

struct ServiceFixture {
  IdList ids = row_ids(10);
  std::shared_ptr<LocalModule> module;
  std::shared_ptr<ModuleService> service;

  explicit ServiceFixture(const LearnerSpec& learner = LearnerSpec::least_squares()) {
    Engine rng = make_engine(1);
    module = make_module("m1", ids, random_matrix(rng, 10, 2), learner);
    service = std::make_shared<ModuleService>(module);
  }

  Envelope fit_request(const std::string& task, Vector values, int round = 1) const {
    ResidualMessage msg;
    msg.task_id = task;
    msg.round = round;
    msg.sender = "alice";
    msg.receiver = "m1";
    msg.ids = ids;
    msg.values = std::move(values);
    return msg.to_envelope(MessageKind::kFitRequest);
  }
};

TEST(Service, ZeroTargetGivesZeroResiduals) {
  for (const LearnerSpec& learner :
       {LearnerSpec::least_squares(), LearnerSpec::parse("regression_tree"),
        LearnerSpec::parse("gradient_boosting:stages=5")}) {
    ServiceFixture f(learner);
    const Envelope reply = f.service->handle(f.fit_request("t", Vector::Zero(10)));
    ASSERT_EQ(reply.kind, MessageKind::kFitResponse) << reply.payload.dump();
    const Vector residual = vector_from_json(reply.payload["values"]);
    EXPECT_LT(residual.cwiseAbs().maxCoeff(), 1e-12);
  }
}

TEST(Service, SurvivesMalformedLineThenServes) {
  ServiceFixture f;
  const Envelope error = decode(f.service->handle_line("{not json"));
  EXPECT_EQ(error.kind, MessageKind::kError);
  EXPECT_EQ(error.payload["code"], "MalformedMessage");
  const Envelope ok = decode(f.service->handle_line(encode(f.fit_request("t", Vector::Ones(10)))));
  EXPECT_EQ(ok.kind, MessageKind::kFitResponse);
}

TEST(Service, ReportsProtocolErrorsAsErrorReplies) {
  ServiceFixture f;
  EXPECT_EQ(f.service->handle(f.fit_request("t", Vector::Ones(10))).kind,
            MessageKind::kFitResponse);
  const Envelope again = f.service->handle(f.fit_request("t", Vector::Ones(10)));
  EXPECT_EQ(again.kind, MessageKind::kError);
  EXPECT_EQ(again.payload["code"], "StorageConflict");
  EXPECT_EQ(code_of([&] { expect_reply(again, MessageKind::kFitResponse); }),
            ErrorCode::kStorageConflict);

  Envelope wrong = f.fit_request("u", Vector::Ones(10));
  wrong.receiver = "m2";
  EXPECT_EQ(f.service->handle(wrong).kind, MessageKind::kError);

  f.module->set_refusal_policy([](const std::string&, int round) { return round > 1; });
  const Envelope refused = f.service->handle(f.fit_request("v", Vector::Ones(10), 2));
  EXPECT_EQ(refused.kind, MessageKind::kRefuse);
  EXPECT_EQ(code_of([&] { expect_reply(refused, MessageKind::kFitResponse); }),
            ErrorCode::kAssistantRefused);
}

TEST(Tcp, MatchesInProcessReplies) {
  ServiceFixture local, wire;
  TcpServer server(wire.service, "127.0.0.1", 0);
  const Endpoint tcp = tcp_endpoint("m1", server.address());
  const Endpoint mem = in_process_endpoint(local.service);
  Engine rng = make_engine(9);
  const Vector target = testing::random_vector(rng, 10);
  EXPECT_EQ(request(tcp, wire.fit_request("t", target)), request(mem, local.fit_request("t", target)));
  server.stop();
}

TEST(Tcp, RefusedWhenNobodyListens) {
  std::uint16_t port;
  {
    ServiceFixture f;
    TcpServer server(f.service, "127.0.0.1", 0);
    port = server.port();
  }
  TcpChannel channel("127.0.0.1", port, std::chrono::milliseconds(500));
  Envelope e;
  e.kind = MessageKind::kRefuse;
  EXPECT_EQ(code_of([&] { channel.request(e); }), ErrorCode::kConnectionRefused);
}

TEST(Tcp, TimesOutOnASilentPeer) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  ASSERT_GE(fd, 0);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ASSERT_EQ(::bind(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)), 0);
  ASSERT_EQ(::listen(fd, 4), 0);
  socklen_t len = sizeof(addr);
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&addr), &len);
  // The kernel completes the handshake from the backlog; nobody ever reads.
  TcpChannel channel("127.0.0.1", ntohs(addr.sin_port), std::chrono::milliseconds(200));
  Envelope e;
  e.kind = MessageKind::kRefuse;
  const auto start = std::chrono::steady_clock::now();
  EXPECT_EQ(code_of([&] { channel.request(e); }), ErrorCode::kTimeout);
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(5));
  ::close(fd);
}

TEST(Tcp, StopReturnsPromptly) {
  ServiceFixture f;
  auto server = std::make_unique<TcpServer>(f.service, "127.0.0.1", 0);
  std::thread waiter([&] { server->wait(); });
  const auto start = std::chrono::steady_clock::now();
  server->stop();
  waiter.join();
  EXPECT_LT(std::chrono::steady_clock::now() - start, std::chrono::seconds(2));
}

TEST(Tcp, BindFailureOnBusyPort) {
  ServiceFixture f;
  TcpServer first(f.service, "127.0.0.1", 0);
  EXPECT_EQ(code_of([&] { TcpServer second(f.service, "127.0.0.1", first.port()); }),
            ErrorCode::kBindFailure);
}

TEST(HostPort, Parses) {
  EXPECT_EQ(parse_host_port("127.0.0.1:8080"), (std::pair<std::string, std::uint16_t>{"127.0.0.1", 8080}));
  EXPECT_EQ(code_of([] { parse_host_port("nohost"); }), ErrorCode::kInvalidArgument);
  EXPECT_EQ(code_of([] { parse_host_port("h:99999"); }), ErrorCode::kInvalidArgument);
}

std::string fuzz_line(Engine& rng, const std::string& valid) {
  std::string line;
  if (uniform01(rng) < 0.5) {
    const int len = static_cast<int>(uniform01(rng) * 200);
    for (int i = 0; i < len; ++i) line.push_back(static_cast<char>(uniform01(rng) * 256));
  } else {
    line = valid.substr(0, valid.size() - 1);
    const int flips = 1 + static_cast<int>(uniform01(rng) * 4);
    for (int i = 0; i < flips; ++i) {
      const auto pos = static_cast<std::size_t>(uniform01(rng) * line.size());
      line[pos] = static_cast<char>(uniform01(rng) * 256);
    }
  }
  for (char& c : line) {
    if (c == '\n') c = ' ';
  }
  return line;
}

// 1000 random and mutated lines over one TCP responder: every reply is a
// decodable envelope, and the responder still serves a real request after.
TEST(Fuzz, RandomLinesNeverKillTheResponder) {
  ServiceFixture f;
  TcpServer server(f.service, "127.0.0.1", 0);
  TcpChannel channel("127.0.0.1", server.port(), std::chrono::milliseconds(5000));
  const std::string valid = encode(f.fit_request("fuzz", Vector::Ones(10)));
  Engine rng = make_engine(2024);
  int errors = 0;
  for (int i = 0; i < 1000; ++i) {
    const std::string line = fuzz_line(rng, valid);
    const std::string reply = channel.exchange_raw(line + "\n");
    ASSERT_FALSE(reply.empty()) << "line " << i;
    const Envelope e = decode(reply);
    if (e.kind == MessageKind::kError) ++errors;
    // A mutation may still be a well-formed request for a fresh task.
    EXPECT_TRUE(e.kind == MessageKind::kError || e.kind == MessageKind::kFitResponse)
        << message_kind_name(e.kind);
  }
  EXPECT_GT(errors, 900);
  const Envelope ok = decode(channel.exchange_raw(encode(f.fit_request("after", Vector::Ones(10)))));
  EXPECT_EQ(ok.kind, MessageKind::kFitResponse);
}

}  // namespace
}  // namespace assist

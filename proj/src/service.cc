#include "assist/service.h"

#include "assist/protocol.h"

namespace assist {

namespace {

// Last resort when even an ERROR reply cannot be encoded.
constexpr std::string_view kFallbackError =
    "{\"from\":\"\",\"kind\":\"ERROR\",\"payload\":{\"code\":\"TransportError\","
    "\"message\":\"\"},\"round\":0,\"task\":\"\",\"to\":\"\",\"v\":1}\n";

}  // namespace

ModuleService::ModuleService(std::shared_ptr<LocalModule> module)
    : module_(std::move(module)), nn_(module_->partition()) {}

Envelope ModuleService::dispatch(const Envelope& request) {
  if (!request.receiver.empty() && request.receiver != module_->id()) {
    throw Error(ErrorCode::kMalformedMessage,
                "addressed to '" + request.receiver + "', this is '" + module_->id() + "'");
  }
  switch (request.kind) {
    case MessageKind::kFitRequest: {
      const ResidualMessage msg = ResidualMessage::from_envelope(request);
      if (module_->refuses(request.task_id, request.round)) {
        Envelope refuse;
        refuse.kind = MessageKind::kRefuse;
        refuse.task_id = request.task_id;
        refuse.round = request.round;
        refuse.sender = module_->id();
        refuse.receiver = request.sender;
        return refuse;
      }
      std::lock_guard lock(fit_mu_);
      return assist_fit(*module_, msg).to_envelope(MessageKind::kFitResponse);
    }
    case MessageKind::kPredictRequest: {
      const IdList ids = ids_from_json(request.payload.at("ids"));
      const Json& rounds_json = request.payload.at("rounds");
      if (!rounds_json.is_array()) throw Error(ErrorCode::kMalformedMessage, "rounds must be an array");
      std::vector<int> rounds;
      for (const Json& r : rounds_json) {
        if (!r.is_number_integer()) throw Error(ErrorCode::kMalformedMessage, "rounds must be integers");
        rounds.push_back(r.get<int>());
      }
      Envelope reply;
      reply.kind = MessageKind::kPredictResponse;
      reply.task_id = request.task_id;
      reply.round = request.round;
      reply.sender = module_->id();
      reply.receiver = request.sender;
      reply.payload = {{"ids", ids_to_json(ids)},
                       {"values", vector_to_json(assist_predict(*module_, request.task_id,
                                                                ids, rounds))}};
      return reply;
    }
    case MessageKind::kLabelsTransfer:
      if (module_->refuses(request.task_id, request.round)) {
        Envelope refuse;
        refuse.kind = MessageKind::kRefuse;
        refuse.task_id = request.task_id;
        refuse.round = request.round;
        refuse.sender = module_->id();
        refuse.receiver = request.sender;
        return refuse;
      }
      return nn_.handle(request, module_->id());
    case MessageKind::kPartialPreact:
    case MessageKind::kWtildeTransfer:
    case MessageKind::kNnPredictRequest:
      return nn_.handle(request, module_->id());
    default:
      throw Error(ErrorCode::kMalformedMessage,
                  "cannot serve " + std::string(message_kind_name(request.kind)));
  }
}

Envelope ModuleService::handle(const Envelope& request) noexcept {
  try {
    return dispatch(request);
  } catch (const Error& e) {
    return make_error_reply(request, e.code(), e.what());
  } catch (const Json::exception& e) {
    return make_error_reply(request, ErrorCode::kMalformedMessage, e.what());
  } catch (const std::exception& e) {
    return make_error_reply(request, ErrorCode::kTransportError, e.what());
  } catch (...) {
    return make_error_reply(request, ErrorCode::kTransportError, "unknown failure");
  }
}

std::string ModuleService::handle_line(std::string_view line) noexcept {
  Envelope request;
  request.sender = "";
  request.receiver = module_->id();
  try {
    request = decode(line);
  } catch (const Error& e) {
    try {
      return encode(make_error_reply(request, e.code(), e.what()));
    } catch (...) {
      return std::string(kFallbackError);
    }
  } catch (...) {
    return std::string(kFallbackError);
  }
  try {
    const Envelope reply = handle(request);
    try {
      return encode(reply);
    } catch (const Error& e) {
      return encode(make_error_reply(request, e.code(), e.what()));
    }
  } catch (...) {
    return std::string(kFallbackError);
  }
}

std::unique_ptr<TcpServer> serve_module(std::shared_ptr<LocalModule> module,
                                        const std::string& host, std::uint16_t port) {
  return std::make_unique<TcpServer>(std::make_shared<ModuleService>(std::move(module)), host,
                                     port);
}

Endpoint in_process_endpoint(std::shared_ptr<LocalModule> module) {
  return in_process_endpoint(std::make_shared<ModuleService>(std::move(module)));
}

Endpoint in_process_endpoint(std::shared_ptr<ModuleService> service) {
  const std::string id = service->module().id();
  return {id, std::make_shared<InProcessChannel>(std::move(service))};
}

}  // namespace assist

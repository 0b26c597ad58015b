#ifndef ASSIST_SERVICE_H_
#define ASSIST_SERVICE_H_

#include <memory>
#include <string>
#include <string_view>

#include "assist/module.h"
#include "assist/nn_protocol.h"
#include "assist/transport.h"

namespace assist {

// Responder for one module: decodes requests, dispatches to the learning,
// prediction and split-network handlers, and never lets an exception escape.
class ModuleService {
 public:
  explicit ModuleService(std::shared_ptr<LocalModule> module);

  Envelope handle(const Envelope& request) noexcept;
  // Full line in, full line out (always newline-terminated).
  std::string handle_line(std::string_view line) noexcept;

  const LocalModule& module() const { return *module_; }
  LocalModule& module() { return *module_; }
  const SplitNetworkAssistant& nn() const { return nn_; }

 private:
  Envelope dispatch(const Envelope& request);

  std::shared_ptr<LocalModule> module_;
  SplitNetworkAssistant nn_;
  // One in-flight FIT per task: serialise fits.
  std::mutex fit_mu_;
};

// serve_module: start a TCP responder for the module. Port 0 = ephemeral.
std::unique_ptr<TcpServer> serve_module(std::shared_ptr<LocalModule> module,
                                        const std::string& host,
                                        std::uint16_t port);

Endpoint in_process_endpoint(std::shared_ptr<LocalModule> module);
Endpoint in_process_endpoint(std::shared_ptr<ModuleService> service);

}  // namespace assist

#endif  // ASSIST_SERVICE_H_

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <charconv>
#include <cstring>

#include "assist/service.h"
#include "assist/transport.h"

namespace assist {

namespace {

constexpr std::size_t kMaxLine = std::size_t{1} << 30;

class Socket {
 public:
  explicit Socket(int fd = -1) : fd_(fd) {}
  ~Socket() {
    if (fd_ >= 0) ::close(fd_);
  }
  Socket(const Socket&) = delete;
  Socket& operator=(const Socket&) = delete;
  int get() const { return fd_; }

 private:
  int fd_;
};

std::string errno_text() { return std::strerror(errno); }

void set_timeouts(int fd, std::chrono::milliseconds timeout) {
  timeval tv{};
  tv.tv_sec = static_cast<time_t>(timeout.count() / 1000);
  tv.tv_usec = static_cast<suseconds_t>((timeout.count() % 1000) * 1000);
  ::setsockopt(fd, SOL_SOCKET, SO_RCVTIMEO, &tv, sizeof(tv));
  ::setsockopt(fd, SOL_SOCKET, SO_SNDTIMEO, &tv, sizeof(tv));
}

// Returns false when the peer has gone away.
bool send_all(int fd, std::string_view bytes) {
  while (!bytes.empty()) {
    const ssize_t n = ::send(fd, bytes.data(), bytes.size(), MSG_NOSIGNAL);
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        throw Error(ErrorCode::kTimeout, "send timed out");
      }
      return false;
    }
    bytes.remove_prefix(static_cast<std::size_t>(n));
  }
  return true;
}

// Reads until '\n'. Leftover bytes after the newline stay in `buffer`.
// Returns nullopt on orderly EOF before a full line.
std::optional<std::string> read_line(int fd, std::string& buffer) {
  std::size_t scanned = 0;
  for (;;) {
    const std::size_t nl = buffer.find('\n', scanned);
    if (nl != std::string::npos) {
      std::string line = buffer.substr(0, nl + 1);
      buffer.erase(0, nl + 1);
      return line;
    }
    scanned = buffer.size();
    if (buffer.size() > kMaxLine) throw Error(ErrorCode::kMalformedMessage, "line too long");
    char chunk[65536];
    const ssize_t n = ::recv(fd, chunk, sizeof(chunk), 0);
    if (n == 0) return std::nullopt;
    if (n < 0) {
      if (errno == EINTR) continue;
      if (errno == EAGAIN || errno == EWOULDBLOCK) {
        throw Error(ErrorCode::kTimeout, "no reply within the timeout");
      }
      throw Error(ErrorCode::kTransportError, "recv: " + errno_text());
    }
    buffer.append(chunk, static_cast<std::size_t>(n));
  }
}

addrinfo* resolve(const std::string& host, std::uint16_t port, bool passive) {
  addrinfo hints{};
  hints.ai_family = AF_INET;
  hints.ai_socktype = SOCK_STREAM;
  if (passive) hints.ai_flags = AI_PASSIVE;
  addrinfo* result = nullptr;
  const std::string service = std::to_string(port);
  const int rc = ::getaddrinfo(host.empty() ? nullptr : host.c_str(), service.c_str(), &hints,
                               &result);
  if (rc != 0) return nullptr;
  return result;
}

}  // namespace

std::pair<std::string, std::uint16_t> parse_host_port(std::string_view text) {
  const std::size_t colon = text.rfind(':');
  if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
    throw Error(ErrorCode::kInvalidArgument, "expected host:port, got '" + std::string(text) + "'");
  }
  unsigned value = 0;
  const std::string_view digits = text.substr(colon + 1);
  const auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), value);
  if (ec != std::errc() || ptr != digits.data() + digits.size() || value > 65535) {
    throw Error(ErrorCode::kInvalidArgument, "bad port in '" + std::string(text) + "'");
  }
  return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(value)};
}

Endpoint tcp_endpoint(std::string module_id, std::string_view host_port,
                      std::chrono::milliseconds timeout) {
  auto [host, port] = parse_host_port(host_port);
  return {std::move(module_id), std::make_shared<TcpChannel>(std::move(host), port, timeout)};
}

TcpChannel::TcpChannel(std::string host, std::uint16_t port, std::chrono::milliseconds timeout)
    : host_(std::move(host)), port_(port), timeout_(timeout) {}

std::string TcpChannel::exchange_raw(std::string_view bytes) {
  addrinfo* addrs = resolve(host_, port_, false);
  if (addrs == nullptr) {
    throw Error(ErrorCode::kConnectionRefused, "cannot resolve '" + host_ + "'");
  }
  Socket sock(::socket(addrs->ai_family, addrs->ai_socktype, addrs->ai_protocol));
  if (sock.get() < 0) {
    ::freeaddrinfo(addrs);
    throw Error(ErrorCode::kTransportError, "socket: " + errno_text());
  }
  set_timeouts(sock.get(), timeout_);
  const int one = 1;
  ::setsockopt(sock.get(), IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  const int rc = ::connect(sock.get(), addrs->ai_addr, addrs->ai_addrlen);
  const int connect_errno = errno;
  ::freeaddrinfo(addrs);
  const std::string where = host_ + ":" + std::to_string(port_);
  if (rc != 0) {
    if (connect_errno == EINPROGRESS || connect_errno == EAGAIN || connect_errno == ETIMEDOUT) {
      throw Error(ErrorCode::kTimeout, "connect to " + where + " timed out");
    }
    throw Error(ErrorCode::kConnectionRefused,
                "connect to " + where + ": " + std::strerror(connect_errno));
  }
  if (!send_all(sock.get(), bytes)) {
    throw Error(ErrorCode::kTransportError, "connection to " + where + " closed while sending");
  }
  ::shutdown(sock.get(), SHUT_WR);
  std::string buffer;
  std::optional<std::string> line = read_line(sock.get(), buffer);
  if (!line) throw Error(ErrorCode::kTransportError, where + " closed without a reply");
  return *line;
}

Envelope TcpChannel::request(const Envelope& envelope) {
  return decode(exchange_raw(encode(envelope)));
}

TcpServer::TcpServer(std::shared_ptr<ModuleService> service, const std::string& host,
                     std::uint16_t port)
    : service_(std::move(service)), host_(host) {
  addrinfo* addrs = resolve(host, port, true);
  if (addrs == nullptr) throw Error(ErrorCode::kBindFailure, "cannot resolve '" + host + "'");
  listen_fd_ = ::socket(addrs->ai_family, addrs->ai_socktype, addrs->ai_protocol);
  if (listen_fd_ < 0) {
    ::freeaddrinfo(addrs);
    throw Error(ErrorCode::kBindFailure, "socket: " + errno_text());
  }
  const int one = 1;
  ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
  const bool bound = ::bind(listen_fd_, addrs->ai_addr, addrs->ai_addrlen) == 0 &&
                     ::listen(listen_fd_, 64) == 0;
  const std::string reason = errno_text();
  ::freeaddrinfo(addrs);
  if (!bound) {
    ::close(listen_fd_);
    throw Error(ErrorCode::kBindFailure,
                host + ":" + std::to_string(port) + ": " + reason);
  }
  sockaddr_in actual{};
  socklen_t len = sizeof(actual);
  ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&actual), &len);
  port_ = ntohs(actual.sin_port);
  accept_thread_ = std::thread([this] { accept_loop(); });
}

TcpServer::~TcpServer() { stop(); }

std::string TcpServer::address() const {
  return (host_.empty() ? std::string("0.0.0.0") : host_) + ":" + std::to_string(port_);
}

void TcpServer::accept_loop() {
  while (!stopping_.load()) {
    pollfd pfd{listen_fd_, POLLIN, 0};
    const int ready = ::poll(&pfd, 1, 100);
    if (ready <= 0) continue;
    const int fd = ::accept(listen_fd_, nullptr, nullptr);
    if (fd < 0) continue;
    {
      std::lock_guard lock(conn_mu_);
      if (stopping_.load()) {
        ::close(fd);
        break;
      }
      conn_fds_.insert(fd);
      ++active_;
    }
    std::thread([this, fd] { serve_connection(fd); }).detach();
  }
}

void TcpServer::serve_connection(int fd) {
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
  std::string buffer;
  try {
    for (;;) {
      std::optional<std::string> line;
      try {
        line = read_line(fd, buffer);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kMalformedMessage) break;
        // Oversized line: answer once and drop the connection.
        send_all(fd, service_->handle_line(std::string_view(buffer).substr(0, 64)));
        break;
      }
      if (!line) {
        // Trailing bytes without a newline still get an answer.
        if (!buffer.empty()) send_all(fd, service_->handle_line(buffer));
        break;
      }
      if (!send_all(fd, service_->handle_line(*line))) break;
    }
  } catch (...) {
  }
  std::lock_guard lock(conn_mu_);
  conn_fds_.erase(fd);
  ::close(fd);
  --active_;
  conn_cv_.notify_all();
}

void TcpServer::stop() {
  {
    std::lock_guard lock(conn_mu_);
    if (stopped_) return;
    stopped_ = true;
    stopping_.store(true);
  }
  if (accept_thread_.joinable()) accept_thread_.join();
  std::unique_lock lock(conn_mu_);
  for (int fd : conn_fds_) ::shutdown(fd, SHUT_RDWR);
  conn_cv_.wait(lock, [this] { return active_ == 0; });
  if (listen_fd_ >= 0) {
    ::close(listen_fd_);
    listen_fd_ = -1;
  }
  conn_cv_.notify_all();
}

void TcpServer::wait() {
  std::unique_lock lock(conn_mu_);
  conn_cv_.wait(lock, [this] { return stopped_ && active_ == 0 && listen_fd_ < 0; });
}

}  // namespace assist

/*
   Copyright 2026 The huffrev Authors

   Licensed under the Apache License, Version 2.0 (the "License");
   you may not use this file except in compliance with the License.
   You may obtain a copy of the License at

       http://www.apache.org/licenses/LICENSE-2.0

   Unless required by applicable law or agreed to in writing, software
   distributed under the License is distributed on an "AS IS" BASIS,
   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
   See the License for the specific language governing permissions and
   limitations under the License.
*/

#include "huffrev/net/transport.hpp"

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
#include <optional>
#include <system_error>

#include <spdlog/spdlog.h>

#include "huffrev/net/messages.hpp"

namespace huffrev::net {

std::uint64_t SystemClock::now() const {
    return static_cast<std::uint64_t>(
        std::chrono::duration_cast<std::chrono::seconds>(std::chrono::system_clock::now().time_since_epoch()).count());
}

// ---------------------------------------------------------------- in-process

void InProcessNetwork::attach(const std::string& address, FrameHandler* handler) {
    std::lock_guard lock(mu_);
    handlers_[address] = handler;
}

void InProcessNetwork::detach(const std::string& address) {
    std::lock_guard lock(mu_);
    handlers_.erase(address);
}

void InProcessNetwork::set_offline(const std::string& address, bool offline) {
    std::lock_guard lock(mu_);
    offline_[address] = offline;
}

void InProcessNetwork::set_tamper(Tamper tamper) {
    std::lock_guard lock(mu_);
    tamper_ = std::move(tamper);
}

Bytes InProcessNetwork::roundtrip(const std::string& address, ByteView frame, std::chrono::milliseconds) {
    FrameHandler* handler = nullptr;
    Tamper tamper;
    {
        std::lock_guard lock(mu_);
        auto it = handlers_.find(address);
        if (it == handlers_.end()) throw TransportError(TransportError::Kind::Unreachable, "no endpoint at " + address);
        if (offline_[address]) throw TransportError(TransportError::Kind::Timeout, address + " did not answer");
        handler = it->second;
        tamper = tamper_;
    }
    Bytes request(frame.begin(), frame.end());
    if (tamper) tamper(address, false, request);
    Bytes reply = handler->handle(request);
    if (tamper) tamper(address, true, reply);
    ++delivered_;
    return reply;
}

// ---------------------------------------------------------------- TCP

HostPort parse_address(const std::string& address) {
    const auto colon = address.rfind(':');
    if (colon == std::string::npos || colon == 0) throw std::invalid_argument("address must be host:port: " + address);
    HostPort hp;
    hp.host = address.substr(0, colon);
    const auto port = std::string_view(address).substr(colon + 1);
    unsigned value = 0;
    auto [ptr, ec] = std::from_chars(port.data(), port.data() + port.size(), value);
    if (ec != std::errc() || ptr != port.data() + port.size() || value > 65535) {
        throw std::invalid_argument("bad port in address: " + address);
    }
    hp.port = static_cast<std::uint16_t>(value);
    return hp;
}

namespace {

class Fd {
  public:
    explicit Fd(int fd = -1) : fd_(fd) {}
    ~Fd() {
        if (fd_ >= 0) ::close(fd_);
    }
    Fd(const Fd&) = delete;
    Fd& operator=(const Fd&) = delete;
    [[nodiscard]] int get() const { return fd_; }

  private:
    int fd_;
};

using Deadline = std::chrono::steady_clock::time_point;

int remaining_ms(Deadline deadline) {
    const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
    return left.count() > 0 ? static_cast<int>(left.count()) : 0;
}

void wait_ready(int fd, short events, Deadline deadline) {
    pollfd p{fd, events, 0};
    while (true) {
        const int rc = ::poll(&p, 1, remaining_ms(deadline));
        if (rc > 0) return;
        if (rc == 0) throw TransportError(TransportError::Kind::Timeout, "timed out");
        if (errno != EINTR) throw TransportError(TransportError::Kind::Io, std::strerror(errno));
    }
}

void write_all(int fd, ByteView data, Deadline deadline) {
    std::size_t off = 0;
    while (off < data.size()) {
        wait_ready(fd, POLLOUT, deadline);
        const auto n = ::send(fd, data.data() + off, data.size() - off, MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw TransportError(TransportError::Kind::Io, std::strerror(errno));
        }
        off += static_cast<std::size_t>(n);
    }
}

//! Returns false on a clean EOF before the first byte.
bool read_exact(int fd, std::uint8_t* out, std::size_t n, Deadline deadline) {
    std::size_t off = 0;
    while (off < n) {
        wait_ready(fd, POLLIN, deadline);
        const auto got = ::recv(fd, out + off, n - off, 0);
        if (got == 0) {
            if (off == 0) return false;
            throw TransportError(TransportError::Kind::Io, "connection closed mid-frame");
        }
        if (got < 0) {
            if (errno == EINTR || errno == EAGAIN) continue;
            throw TransportError(TransportError::Kind::Io, std::strerror(errno));
        }
        off += static_cast<std::size_t>(got);
    }
    return true;
}

//! Reads one frame. A header that fails validation is returned as-is so the caller sees MalformedFrame.
std::optional<Bytes> read_frame(int fd, Deadline deadline) {
    Bytes frame(kFrameHeaderBytes);
    if (!read_exact(fd, frame.data(), kFrameHeaderBytes, deadline)) return std::nullopt;
    const auto len = frame_payload_length(frame);
    frame.resize(kFrameHeaderBytes + len);
    if (len > 0 && !read_exact(fd, frame.data() + kFrameHeaderBytes, len, deadline)) {
        throw TransportError(TransportError::Kind::Io, "connection closed mid-frame");
    }
    return frame;
}

addrinfo* resolve(const HostPort& hp, bool passive) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    if (passive) hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    const auto port = std::to_string(hp.port);
    const int rc = ::getaddrinfo(hp.host.empty() ? nullptr : hp.host.c_str(), port.c_str(), &hints, &res);
    if (rc != 0) throw TransportError(TransportError::Kind::Unreachable, ::gai_strerror(rc));
    return res;
}

}  // namespace

Bytes TcpTransport::roundtrip(const std::string& address, ByteView frame, std::chrono::milliseconds timeout) {
    const auto deadline = std::chrono::steady_clock::now() + timeout;
    HostPort hp;
    try {
        hp = parse_address(address);
    } catch (const std::invalid_argument& e) {
        throw TransportError(TransportError::Kind::Unreachable, e.what());
    }
    addrinfo* res = resolve(hp, false);
    Fd sock(::socket(res->ai_family, SOCK_STREAM | SOCK_NONBLOCK | SOCK_CLOEXEC, 0));
    if (sock.get() < 0) {
        ::freeaddrinfo(res);
        throw TransportError(TransportError::Kind::Io, std::strerror(errno));
    }
    const int rc = ::connect(sock.get(), res->ai_addr, res->ai_addrlen);
    ::freeaddrinfo(res);
    if (rc < 0 && errno != EINPROGRESS) {
        throw TransportError(TransportError::Kind::Unreachable, address + ": " + std::strerror(errno));
    }
    wait_ready(sock.get(), POLLOUT, deadline);
    int err = 0;
    socklen_t len = sizeof(err);
    ::getsockopt(sock.get(), SOL_SOCKET, SO_ERROR, &err, &len);
    if (err != 0) throw TransportError(TransportError::Kind::Unreachable, address + ": " + std::strerror(err));

    write_all(sock.get(), frame, deadline);
    auto reply = read_frame(sock.get(), deadline);
    if (!reply) throw TransportError(TransportError::Kind::Io, address + " closed without replying");
    return std::move(*reply);
}

TcpServer::TcpServer(FrameHandler& handler, const std::string& address) : handler_(handler), bind_(parse_address(address)) {}

TcpServer::~TcpServer() { stop(); }

void TcpServer::start() {
    addrinfo* res = resolve(bind_, true);
    listen_fd_ = ::socket(res->ai_family, SOCK_STREAM | SOCK_CLOEXEC, 0);
    if (listen_fd_ < 0) {
        ::freeaddrinfo(res);
        throw std::system_error(errno, std::generic_category(), "socket");
    }
    int one = 1;
    ::setsockopt(listen_fd_, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
    if (::bind(listen_fd_, res->ai_addr, res->ai_addrlen) < 0 || ::listen(listen_fd_, 64) < 0) {
        const int e = errno;
        ::freeaddrinfo(res);
        ::close(listen_fd_);
        listen_fd_ = -1;
        throw std::system_error(e, std::generic_category(), "bind " + bind_.host + ":" + std::to_string(bind_.port));
    }
    ::freeaddrinfo(res);
    sockaddr_in bound{};
    socklen_t blen = sizeof(bound);
    ::getsockname(listen_fd_, reinterpret_cast<sockaddr*>(&bound), &blen);
    port_ = ntohs(bound.sin_port);
    running_ = true;
    acceptor_ = std::thread([this] { accept_loop(); });
}

void TcpServer::stop() {
    if (!running_.exchange(false)) return;
    if (acceptor_.joinable()) acceptor_.join();
    ::close(listen_fd_);
    listen_fd_ = -1;
    std::unique_lock lock(conn_mu_);
    conn_cv_.wait(lock, [this] { return active_ == 0; });
}

void TcpServer::accept_loop() {
    while (running_) {
        pollfd p{listen_fd_, POLLIN, 0};
        if (::poll(&p, 1, 100) <= 0) continue;
        const int fd = ::accept4(listen_fd_, nullptr, nullptr, SOCK_CLOEXEC);
        if (fd < 0) continue;
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
        {
            std::lock_guard lock(conn_mu_);
            ++active_;
        }
        std::thread([this, fd] {
            serve_connection(fd);
            std::lock_guard lock(conn_mu_);
            --active_;
            conn_cv_.notify_all();
        }).detach();
    }
}

void TcpServer::serve_connection(int raw_fd) {
    Fd fd(raw_fd);
    while (running_) {
        pollfd p{fd.get(), POLLIN, 0};
        const int rc = ::poll(&p, 1, 100);
        if (rc == 0) continue;
        if (rc < 0 && errno != EINTR) return;
        try {
            const auto deadline = std::chrono::steady_clock::now() + std::chrono::seconds(10);
            auto frame = read_frame(fd.get(), deadline);
            if (!frame) return;
            const auto reply = handler_.handle(*frame);
            write_all(fd.get(), reply, std::chrono::steady_clock::now() + std::chrono::seconds(10));
        } catch (const MalformedFrame& e) {
            spdlog::debug("dropping connection: {}", e.what());
            const auto reply = encode_frame(ErrorMessage{ErrorCode::BadRequest, 0, e.what()});
            try {
                write_all(fd.get(), reply, std::chrono::steady_clock::now() + std::chrono::seconds(1));
            } catch (const TransportError&) {
            }
            return;
        } catch (const TransportError& e) {
            spdlog::debug("connection closed: {}", e.what());
            return;
        }
    }
}

}  // namespace huffrev::net

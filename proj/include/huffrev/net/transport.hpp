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

#pragma once

// Request/reply transports. Every exchange in the protocol is one frame out
// and one frame back, so a transport only needs a round trip primitive.

#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>

#include "huffrev/bytes.hpp"

namespace huffrev::net {

//! Seconds-resolution clock, injectable so tests control statement timestamps.
class Clock {
  public:
    virtual ~Clock() = default;
    [[nodiscard]] virtual std::uint64_t now() const = 0;
};

class SystemClock final : public Clock {
  public:
    [[nodiscard]] std::uint64_t now() const override;
};

class ManualClock final : public Clock {
  public:
    explicit ManualClock(std::uint64_t t = 0) : t_(t) {}
    [[nodiscard]] std::uint64_t now() const override { return t_.load(); }
    void set(std::uint64_t t) { t_ = t; }
    void advance(std::uint64_t dt) { t_ += dt; }

  private:
    std::atomic<std::uint64_t> t_;
};

//! Anything that turns one request frame into one reply frame.
class FrameHandler {
  public:
    virtual ~FrameHandler() = default;
    [[nodiscard]] virtual Bytes handle(ByteView frame) = 0;
};

class TransportError : public std::runtime_error {
  public:
    enum class Kind { Timeout, Unreachable, Io };
    TransportError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
    [[nodiscard]] Kind kind() const { return kind_; }

  private:
    Kind kind_;
};

class Transport {
  public:
    virtual ~Transport() = default;
    //! Sends one frame to `address` and returns the reply frame; throws TransportError.
    virtual Bytes roundtrip(const std::string& address, ByteView frame, std::chrono::milliseconds timeout) = 0;
};

/// Direct in-process delivery with fault injection. Handlers run on the
/// caller's thread.
class InProcessNetwork final : public Transport {
  public:
    //! Rewrites a frame in flight; called for requests and replies alike.
    using Tamper = std::function<void(const std::string& address, bool reply, Bytes& frame)>;

    void attach(const std::string& address, FrameHandler* handler);
    void detach(const std::string& address);
    //! Offline endpoints behave like a silent peer: the round trip times out.
    void set_offline(const std::string& address, bool offline);
    void set_tamper(Tamper tamper);

    Bytes roundtrip(const std::string& address, ByteView frame, std::chrono::milliseconds timeout) override;

    [[nodiscard]] std::uint64_t frames_delivered() const { return delivered_.load(); }

  private:
    std::mutex mu_;
    std::map<std::string, FrameHandler*> handlers_;
    std::map<std::string, bool> offline_;
    Tamper tamper_;
    std::atomic<std::uint64_t> delivered_{0};
};

struct HostPort {
    std::string host;
    std::uint16_t port = 0;
};

//! Parses "host:port"; throws std::invalid_argument.
HostPort parse_address(const std::string& address);

//! One TCP connection per round trip.
class TcpTransport final : public Transport {
  public:
    Bytes roundtrip(const std::string& address, ByteView frame, std::chrono::milliseconds timeout) override;
};

/// Accept loop on a background thread; each connection gets its own detached
/// thread and may carry any number of request/reply exchanges. stop() waits
/// for open connections to wind down.
class TcpServer {
  public:
    TcpServer(FrameHandler& handler, const std::string& address);
    ~TcpServer();
    TcpServer(const TcpServer&) = delete;
    TcpServer& operator=(const TcpServer&) = delete;

    //! Binds and starts accepting; throws std::system_error on bind failure.
    void start();
    void stop();
    //! The bound port (useful with port 0).
    [[nodiscard]] std::uint16_t port() const { return port_; }

  private:
    void accept_loop();
    void serve_connection(int fd);

    FrameHandler& handler_;
    HostPort bind_;
    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread acceptor_;
    std::mutex conn_mu_;
    std::condition_variable conn_cv_;
    int active_ = 0;
};

}  // namespace huffrev::net

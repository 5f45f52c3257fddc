#pragma once

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <cstring>
#include <deque>
#include <memory>
#include <mutex>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "otx/error.hpp"

namespace otx {

// Every message is framed as { type: u8, len: u32 LE, payload }.
enum class MsgType : uint8_t {
    hello = 1,
    seed_pairs = 2,
    matrix_d = 3,
    coin_r = 4,
    coin_s = 5,
    checks = 6,
    masked = 7,
    abort = 8,
};

constexpr size_t kFrameHeaderBytes = 5;
constexpr uint32_t kMaxFrameLen = 1u << 30;

/// Exact byte counts per traffic category, measured at the framing layer.
/// Frame headers and handshake payloads land in `framing`; the insecure
/// test-mode seed transfer is kept in its own bucket so it never pollutes
/// the extension-phase numbers.
struct ByteCounters {
    uint64_t base_ot = 0;
    uint64_t matrix_d = 0;
    uint64_t coin_toss = 0;
    uint64_t checks = 0;
    uint64_t masked = 0;
    uint64_t framing = 0;

    uint64_t total() const {
        return base_ot + matrix_d + coin_toss + checks + masked + framing;
    }

    void add_frame(MsgType t, uint64_t payload) {
        framing += kFrameHeaderBytes;
        switch (t) {
            case MsgType::seed_pairs: base_ot += payload; break;
            case MsgType::matrix_d: matrix_d += payload; break;
            case MsgType::coin_r:
            case MsgType::coin_s: coin_toss += payload; break;
            case MsgType::checks: checks += payload; break;
            case MsgType::masked: masked += payload; break;
            case MsgType::hello:
            case MsgType::abort: framing += payload; break;
        }
    }
};

/// Reliable, ordered byte stream.
class Stream {
  public:
    virtual ~Stream() = default;
    virtual void send(const uint8_t* data, size_t len) = 0;
    virtual void recv(uint8_t* data, size_t len) = 0;  // exactly len or throws
};

namespace detail {

struct PipeBuf {
    std::mutex mu;
    std::condition_variable cv;
    std::deque<uint8_t> q;
    bool closed = false;
};

}  // namespace detail

/// In-process bidirectional pipe endpoint, for tests and loopback harnesses.
class PipeStream : public Stream {
  public:
    PipeStream(std::shared_ptr<detail::PipeBuf> out, std::shared_ptr<detail::PipeBuf> in)
        : out_(std::move(out)), in_(std::move(in)) {}

    ~PipeStream() override {
        std::lock_guard lk(out_->mu);
        out_->closed = true;
        out_->cv.notify_all();
    }

    void send(const uint8_t* data, size_t len) override {
        std::lock_guard lk(out_->mu);
        if (out_->closed) throw TransportError("pipe closed");
        out_->q.insert(out_->q.end(), data, data + len);
        out_->cv.notify_all();
    }

    void recv(uint8_t* data, size_t len) override {
        std::unique_lock lk(in_->mu);
        size_t got = 0;
        while (got < len) {
            in_->cv.wait(lk, [&] { return !in_->q.empty() || in_->closed; });
            if (in_->q.empty() && in_->closed)
                throw TransportError("pipe closed by peer");
            size_t take = std::min(len - got, in_->q.size());
            std::copy_n(in_->q.begin(), take, data + got);
            in_->q.erase(in_->q.begin(), in_->q.begin() + take);
            got += take;
        }
    }

  private:
    std::shared_ptr<detail::PipeBuf> out_, in_;
};

inline std::pair<std::unique_ptr<PipeStream>, std::unique_ptr<PipeStream>> make_pipe() {
    auto a = std::make_shared<detail::PipeBuf>();
    auto b = std::make_shared<detail::PipeBuf>();
    return {std::make_unique<PipeStream>(a, b), std::make_unique<PipeStream>(b, a)};
}

/// One TCP connection; listens for a single peer or connects with retry.
class TcpStream : public Stream {
  public:
    static std::unique_ptr<TcpStream> listen(const std::string& host, uint16_t port) {
        int lfd = ::socket(AF_INET, SOCK_STREAM, 0);
        if (lfd < 0) throw TransportError("socket: " + err());
        int one = 1;
        ::setsockopt(lfd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof(one));
        sockaddr_in addr = make_addr(host, port);
        if (::bind(lfd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) < 0) {
            ::close(lfd);
            throw TransportError("bind: " + err());
        }
        if (::listen(lfd, 1) < 0) {
            ::close(lfd);
            throw TransportError("listen: " + err());
        }
        int fd = ::accept(lfd, nullptr, nullptr);
        ::close(lfd);
        if (fd < 0) throw TransportError("accept: " + err());
        return std::unique_ptr<TcpStream>(new TcpStream(fd));
    }

    static std::unique_ptr<TcpStream> connect(const std::string& host, uint16_t port,
                                              int attempts = 100) {
        sockaddr_in addr = make_addr(host, port);
        for (int i = 0; i < attempts; ++i) {
            int fd = ::socket(AF_INET, SOCK_STREAM, 0);
            if (fd < 0) throw TransportError("socket: " + err());
            if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) == 0)
                return std::unique_ptr<TcpStream>(new TcpStream(fd));
            ::close(fd);
            std::this_thread::sleep_for(std::chrono::milliseconds(50));
        }
        throw TransportError("connect: peer unreachable at " + host + ":" +
                             std::to_string(port));
    }

    ~TcpStream() override {
        if (fd_ >= 0) ::close(fd_);
    }

    void send(const uint8_t* data, size_t len) override {
        while (len > 0) {
            ssize_t n = ::send(fd_, data, len, MSG_NOSIGNAL);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError("send: " + err());
            }
            data += n;
            len -= size_t(n);
        }
    }

    void recv(uint8_t* data, size_t len) override {
        while (len > 0) {
            ssize_t n = ::recv(fd_, data, len, 0);
            if (n < 0) {
                if (errno == EINTR) continue;
                throw TransportError("recv: " + err());
            }
            if (n == 0) throw TransportError("recv: connection closed by peer");
            data += n;
            len -= size_t(n);
        }
    }

  private:
    explicit TcpStream(int fd) : fd_(fd) {
        int one = 1;
        ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof(one));
    }

    static sockaddr_in make_addr(const std::string& host, uint16_t port) {
        sockaddr_in addr{};
        addr.sin_family = AF_INET;
        addr.sin_port = htons(port);
        if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1)
            throw ParamError("bad IPv4 address: " + host);
        return addr;
    }

    static std::string err() { return std::strerror(errno); }

    int fd_;
};

/// Thrown when the peer sends MSG_ABORT instead of the expected message.
struct PeerAbort : ProtocolError {
    explicit PeerAbort(AbortReason r)
        : ProtocolError(r, std::string("peer aborted: ") + abort_reason_name(r)) {}
};

/// Framed message channel with exact per-category byte accounting of all
/// traffic it carries, in both directions.
class Channel {
  public:
    explicit Channel(std::unique_ptr<Stream> s) : s_(std::move(s)) {}

    void send_msg(MsgType t, const uint8_t* payload, size_t len) {
        if (len > kMaxFrameLen) throw ProtocolError(AbortReason::malformed_message, "frame too large");
        uint8_t hdr[kFrameHeaderBytes];
        hdr[0] = uint8_t(t);
        for (int k = 0; k < 4; ++k) hdr[1 + k] = uint8_t(len >> (8 * k));
        s_->send(hdr, sizeof(hdr));
        if (len) s_->send(payload, len);
        counters_.add_frame(t, len);
    }

    void send_msg(MsgType t, const std::vector<uint8_t>& payload) {
        send_msg(t, payload.data(), payload.size());
    }

    std::pair<MsgType, std::vector<uint8_t>> recv_msg() {
        uint8_t hdr[kFrameHeaderBytes];
        s_->recv(hdr, sizeof(hdr));
        if (hdr[0] < uint8_t(MsgType::hello) || hdr[0] > uint8_t(MsgType::abort))
            throw ProtocolError(AbortReason::malformed_message,
                                "unknown message type " + std::to_string(hdr[0]));
        uint32_t len = 0;
        for (int k = 0; k < 4; ++k) len |= uint32_t(hdr[1 + k]) << (8 * k);
        if (len > kMaxFrameLen)
            throw ProtocolError(AbortReason::malformed_message, "frame too large");
        std::vector<uint8_t> payload(len);
        if (len) s_->recv(payload.data(), len);
        auto t = MsgType(hdr[0]);
        counters_.add_frame(t, len);
        return {t, std::move(payload)};
    }

    /// Receives a frame that must be of type `want`; an incoming MSG_ABORT is
    /// surfaced as PeerAbort, anything else as a protocol error.
    std::vector<uint8_t> recv_expect(MsgType want) {
        auto [t, payload] = recv_msg();
        if (t == want) return std::move(payload);
        if (t == MsgType::abort) {
            AbortReason r = payload.empty() ? AbortReason::none : AbortReason(payload[0]);
            throw PeerAbort(r);
        }
        throw ProtocolError(AbortReason::malformed_message,
                            "expected message type " + std::to_string(int(want)) +
                                ", got " + std::to_string(int(t)));
    }

    void send_abort(AbortReason r) {
        uint8_t b = uint8_t(r);
        send_msg(MsgType::abort, &b, 1);
    }

    const ByteCounters& counters() const { return counters_; }
    ByteCounters& counters() { return counters_; }

  private:
    std::unique_ptr<Stream> s_;
    ByteCounters counters_;
};

}  // namespace otx

// otx: networked 1-out-of-n OT extension endpoint.
//
// One process per party. The sender and receiver connect over TCP, run the
// extension in batches, and write an exact per-category byte/timing report.
// The attacker role drives the malicious-receiver strategy against a
// semi-honest peer (and demonstrates the abort against an active one).

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>

#include "otx/adversary.hpp"
#include "otx/base_ot.hpp"
#include "otx/protocol.hpp"
#include "otx/stats.hpp"
#include "otx/wire.hpp"

using namespace otx;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAbort = 2;
constexpr int kExitTransport = 3;
constexpr int kExitUsage = 4;

std::pair<std::string, uint16_t> parse_endpoint(const std::string& s) {
    auto colon = s.rfind(':');
    if (colon == std::string::npos)
        throw ParamError("endpoint must be host:port, got '" + s + "'");
    int port = std::stoi(s.substr(colon + 1));
    if (port < 1 || port > 65535) throw ParamError("port out of range");
    return {s.substr(0, colon), uint16_t(port)};
}

SenderInputs load_inputs(const std::string& path, uint64_t m, uint32_t n, uint32_t ell) {
    if (ell > 64) throw ParamError("--input-file supports ell <= 64");
    std::ifstream f(path);
    if (!f.good()) throw ParamError("cannot open input file " + path);
    SenderInputs in(m, n, ell);
    std::string line;
    uint64_t i = 0;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        if (i >= m) throw ParamError("input file has more than m lines");
        std::istringstream ls(line);
        std::string tok;
        for (uint32_t j = 0; j < n; ++j) {
            if (!(ls >> tok)) throw ParamError("input file: line " + std::to_string(i + 1) +
                                               " has fewer than n values");
            uint64_t v = std::stoull(tok, nullptr, 16);
            if (ell < 64 && v >> ell)
                throw ParamError("input value does not fit in ell bits");
            in.set(i, j, v);
        }
        ++i;
    }
    if (i != m) throw ParamError("input file has fewer than m lines");
    return in;
}

std::vector<uint16_t> load_choices(const std::string& path, uint64_t m, uint32_t n) {
    std::ifstream f(path);
    if (!f.good()) throw ParamError("cannot open choices file " + path);
    std::vector<uint16_t> r;
    std::string line;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        long v = std::stol(line);
        if (v < 1 || uint64_t(v) > n) throw ParamError("choice out of [1, n]: " + line);
        r.push_back(uint16_t(v));
    }
    if (r.size() != m) throw ParamError("choices file must have exactly m lines");
    return r;
}

std::string value_hex(const PackedValues& vals, uint64_t idx) {
    static const char* digits = "0123456789abcdef";
    std::vector<uint8_t> buf(vals.value_bytes());
    vals.get_bytes(idx, buf.data());
    std::string out;
    bool leading = true;
    for (size_t k = buf.size(); k-- > 0;) {
        if (leading && buf[k] == 0 && k > 0) continue;
        if (leading) {
            if (buf[k] >> 4) out.push_back(digits[buf[k] >> 4]);
            out.push_back(digits[buf[k] & 0xF]);
            leading = false;
        } else {
            out.push_back(digits[buf[k] >> 4]);
            out.push_back(digits[buf[k] & 0xF]);
        }
    }
    return out;
}

void write_stats(const std::string& path, const TranscriptStats& stats) {
    if (path.empty()) return;
    std::ofstream f(path);
    f << stats.to_json().dump(2) << "\n";
}

std::string bitvec_hex(const BitVector& v) {
    static const char* digits = "0123456789abcdef";
    std::string out;
    for (uint8_t b : v.to_bytes()) {
        out.push_back(digits[b >> 4]);
        out.push_back(digits[b & 0xF]);
    }
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"1-out-of-n OT extension endpoint"};

    std::string role, mode_str = "active";
    Params params;
    params.m = 0;
    std::string listen_ep, connect_ep;
    std::string input_file, choices_file, output_file, stats_json;
    std::optional<uint64_t> seed;
    bool mu_given = false;

    app.add_option("--role", role, "sender | receiver | attacker")
        ->required()
        ->check(CLI::IsMember({"sender", "receiver", "attacker"}));
    app.add_option("--mode", mode_str, "semi-honest | active (default active)")
        ->check(CLI::IsMember({"semi-honest", "active"}));
    app.add_option("--m", params.m, "number of extended OTs")->required();
    app.add_option("--n", params.n, "inputs per OT (power of two)")->required();
    app.add_option("--ell", params.ell, "sender input length in bits")->required();
    app.add_option("--kappa", params.kappa, "code length / seed width (default 256)");
    auto* mu_opt = app.add_option("--mu", params.mu, "check and padding count (default 96)");
    app.add_option("--batch-size", params.batch_size, "OTs per batch (default 65536)");
    app.add_option("--listen", listen_ep, "listen on host:port");
    app.add_option("--connect", connect_ep, "connect to host:port");
    app.add_option("--input-file", input_file, "sender values, one line of n hex values per OT");
    app.add_option("--choices-file", choices_file, "receiver choices, one integer per line");
    app.add_option("--output-file", output_file, "receiver output values, hex per line");
    app.add_option("--stats-json", stats_json, "write the session stats report here");
    app.add_option("--seed", seed, "deterministic randomness (testing only)");

    try {
        app.parse(argc, argv);
        mu_given = mu_opt->count() > 0;
        params.mode = (mode_str == "active") ? Mode::active : Mode::semi_honest;
        if (params.mode == Mode::semi_honest) {
            if (mu_given && params.mu != 0)
                throw ParamError("semi-honest mode runs without checks; omit --mu or pass 0");
            params.mu = 0;
        }
        params.validate();
        if (listen_ep.empty() == connect_ep.empty())
            throw ParamError("exactly one of --listen / --connect is required");
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    } catch (const ParamError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    }

    try {
        std::unique_ptr<Stream> stream;
        if (!listen_ep.empty()) {
            auto [host, port] = parse_endpoint(listen_ep);
            stream = TcpStream::listen(host, port);
        } else {
            auto [host, port] = parse_endpoint(connect_ep);
            stream = TcpStream::connect(host, port);
        }
        Channel channel(std::move(stream));
        IdealDealerBaseOt base_ot;

        if (role == "sender") {
            SenderInputs inputs =
                !input_file.empty()
                    ? load_inputs(input_file, params.m, params.n, params.ell)
                    : (seed ? derive_inputs(*seed, params.m, params.n, params.ell)
                            : [&] {
                                  Rng r;
                                  SenderInputs in(params.m, params.n, params.ell);
                                  in.vals.raw() =
                                      r.bits(params.m * uint64_t(params.n) * params.ell);
                                  return in;
                              }());
            Rng rng = seed ? Rng(*seed, "harness-sender") : Rng();
            auto res = run_sender_session(channel, params, inputs, rng, base_ot);
            write_stats(stats_json, res.stats);
            if (res.aborted) {
                std::cerr << "session aborted: " << abort_reason_name(res.abort_reason)
                          << " (batch " << res.aborted_batch << ")\n";
                return kExitAbort;
            }
            auto predicted = predict_bytes(params);
            std::cerr << "sender done: " << params.m << " OTs, "
                      << res.stats.bytes.total() << " bytes ("
                      << extension_bytes(res.stats.bytes) << " extension, predicted "
                      << extension_bytes(predicted) << "), "
                      << res.stats.time_ms.total << " ms\n";
            return kExitOk;
        }

        std::vector<uint16_t> choices =
            !choices_file.empty()
                ? load_choices(choices_file, params.m, params.n)
                : derive_choices(seed.value_or(Rng().next_u64()), params.m, params.n);

        if (role == "receiver") {
            Rng rng = seed ? Rng(*seed, "harness-receiver") : Rng();
            auto res = run_receiver_session(channel, params, choices, rng, base_ot);
            write_stats(stats_json, res.stats);
            if (res.aborted) {
                std::cerr << "session aborted: " << abort_reason_name(res.abort_reason) << "\n";
                return kExitAbort;
            }
            if (!output_file.empty()) {
                std::ofstream f(output_file);
                for (uint64_t i = 0; i < params.m; ++i)
                    f << value_hex(res.received, i) << "\n";
            }
            auto predicted = predict_bytes(params);
            std::cerr << "receiver done: " << params.m << " OTs, "
                      << res.stats.bytes.total() << " bytes ("
                      << extension_bytes(res.stats.bytes) << " extension, predicted "
                      << extension_bytes(predicted) << "), "
                      << res.stats.time_ms.total << " ms\n";
            return kExitOk;
        }

        // attacker: plays the receiver maliciously; a-priori knowledge of the
        // chosen inputs comes from the shared harness seed
        if (!seed)
            throw ParamError("--role attacker requires --seed (shared with the sender harness)");
        if (params.batch_size < params.m) params.batch_size = params.m;
        SenderInputs truth = derive_inputs(*seed, params.m, params.n, params.ell);
        std::vector<BitVector> known;
        uint64_t k_rows = std::min<uint64_t>(2 * uint64_t(params.kappa), params.m);
        for (uint64_t i = 0; i < k_rows; ++i) {
            std::vector<uint8_t> buf((params.ell + 7) / 8);
            truth.vals.get_bytes(truth.flat(i, choices[i] - 1), buf.data());
            known.push_back(BitVector::from_bytes(buf.data(), params.ell));
        }
        Rng rng(*seed, "attacker");
        auto rep = adversary::full_attack(channel, params, choices, known, rng);

        bool matched = false;
        if (!rep.aborted) {
            matched = true;
            for (uint64_t i = 0; i < params.m && matched; ++i)
                for (uint32_t j = 0; j < params.n; ++j)
                    if (rep.inputs.get(i, j) != truth.get(i, j)) {
                        matched = false;
                        break;
                    }
        }
        nlohmann::json report{
            {"s_recovered", rep.aborted ? "" : bitvec_hex(rep.s)},
            {"queries_used", rep.queries_s + rep.queries_unmask},
            {"queries_s_recovery", rep.queries_s},
            {"queries_unmask", rep.queries_unmask},
            {"inputs_matched", matched},
            {"mode_of_peer", mode_name(params.mode)},
            {"aborted", rep.aborted},
        };
        std::cout << report.dump(2) << "\n";
        if (!stats_json.empty()) {
            std::ofstream f(stats_json);
            f << report.dump(2) << "\n";
        }
        return rep.aborted ? kExitAbort : kExitOk;
    } catch (const PeerAbort& e) {
        std::cerr << "peer aborted: " << e.what() << "\n";
        return kExitAbort;
    } catch (const ProtocolError& e) {
        std::cerr << "protocol error: " << e.what() << "\n";
        return kExitAbort;
    } catch (const TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitTransport;
    } catch (const ParamError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    }
}

#pragma once

// Client side of the external-expert protocol.
//
// The adapter is a child process started with `/bin/sh -c <command>`. Each
// request is one JSON line on the adapter's stdin,
//   {"id": <int>, "options": <int>, "payload": <string>}
// and the adapter answers with one JSON line on stdout,
//   {"id": <int>, "scores": [<L non-negative reals>]}
// Scores are normalized into an answer distribution. A missing, late,
// malformed or mismatched answer raises ExternalExpertFailure, after which
// the connection is unusable.

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cmath>
#include <cstring>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "infolab/errors.hpp"
#include "infolab/info_math.hpp"

extern char** environ;

namespace infolab {

class ExternalProcess {
public:
    static constexpr std::chrono::milliseconds kDefaultTimeout{10'000};

    explicit ExternalProcess(std::string command, std::chrono::milliseconds timeout = kDefaultTimeout)
        : command_(std::move(command)), timeout_(timeout) {
        // A dead adapter must surface as EPIPE from write(), not kill us.
        static std::once_flag ignore_sigpipe;
        std::call_once(ignore_sigpipe, [] { ::signal(SIGPIPE, SIG_IGN); });
        spawn();
    }

    ExternalProcess(const ExternalProcess&) = delete;
    ExternalProcess& operator=(const ExternalProcess&) = delete;

    ~ExternalProcess() { shutdown(); }

    /// Sends one request line and waits for one response line.
    std::string round_trip(const std::string& line) {
        if (broken_) throw ExternalExpertFailure("adapter connection is no longer usable");
        try {
            write_all(line + "\n");
            return read_line();
        } catch (...) {
            broken_ = true;
            throw;
        }
    }

    const std::string& command() const noexcept { return command_; }

private:
    void spawn() {
        int in_pipe[2];
        int out_pipe[2];
        if (::pipe2(in_pipe, O_CLOEXEC) != 0) fail_errno("pipe");
        if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            fail_errno("pipe");
        }
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
        posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);

        // Own process group, so shutdown reaches whatever the shell started.
        posix_spawnattr_t attr;
        posix_spawnattr_init(&attr);
        posix_spawnattr_setflags(&attr, POSIX_SPAWN_SETPGROUP);
        posix_spawnattr_setpgroup(&attr, 0);

        std::string sh = "/bin/sh";
        std::string dash_c = "-c";
        char* argv[] = {sh.data(), dash_c.data(), command_.data(), nullptr};
        const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, &attr, argv, environ);
        posix_spawn_file_actions_destroy(&actions);
        posix_spawnattr_destroy(&attr);
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        if (rc != 0) {
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            pid_ = -1;
            throw ExternalExpertFailure("cannot start adapter: " + std::string(std::strerror(rc)));
        }
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
    }

    void write_all(const std::string& data) {
        std::size_t off = 0;
        while (off < data.size()) {
            const ssize_t n = ::write(to_child_, data.data() + off, data.size() - off);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail_errno("write to adapter");
            }
            off += static_cast<std::size_t>(n);
        }
    }

    std::string read_line() {
        const auto deadline = std::chrono::steady_clock::now() + timeout_;
        for (;;) {
            if (const auto nl = buffer_.find('\n'); nl != std::string::npos) {
                std::string line = buffer_.substr(0, nl);
                buffer_.erase(0, nl + 1);
                return line;
            }
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(
                deadline - std::chrono::steady_clock::now());
            if (left.count() <= 0) throw ExternalExpertFailure("adapter timed out");
            pollfd pfd{from_child_, POLLIN, 0};
            const int ready = ::poll(&pfd, 1, static_cast<int>(left.count()));
            if (ready < 0) {
                if (errno == EINTR) continue;
                fail_errno("poll adapter");
            }
            if (ready == 0) throw ExternalExpertFailure("adapter timed out");
            char chunk[4096];
            const ssize_t n = ::read(from_child_, chunk, sizeof chunk);
            if (n < 0) {
                if (errno == EINTR) continue;
                fail_errno("read from adapter");
            }
            if (n == 0) throw ExternalExpertFailure("adapter closed its output");
            buffer_.append(chunk, static_cast<std::size_t>(n));
        }
    }

    void shutdown() noexcept {
        if (to_child_ >= 0) ::close(to_child_);
        if (from_child_ >= 0) ::close(from_child_);
        to_child_ = from_child_ = -1;
        if (pid_ <= 0) return;
        // Closing stdin asks the adapter to exit; give it a moment, then kill
        // the group.
        bool exited = false;
        for (int i = 0; i < 50 && !exited; ++i) {
            exited = ::waitpid(pid_, nullptr, WNOHANG) == pid_;
            if (!exited) std::this_thread::sleep_for(std::chrono::milliseconds(10));
        }
        ::kill(-pid_, SIGKILL);
        if (!exited) ::waitpid(pid_, nullptr, 0);
        pid_ = -1;
    }

    [[noreturn]] static void fail_errno(const char* what) {
        throw ExternalExpertFailure(std::string(what) + ": " + std::strerror(errno));
    }

    std::string command_;
    std::chrono::milliseconds timeout_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string buffer_;
    bool broken_ = false;
};

/// Builds the request line for one question.
inline std::string encode_expert_request(long long id, std::size_t options, const std::string& payload) {
    nlohmann::json j;
    j["id"] = id;
    j["options"] = options;
    j["payload"] = payload;
    return j.dump();
}

/// Parses and validates one response line into an answer distribution.
inline CategoricalDistribution decode_expert_response(const std::string& line, long long id, std::size_t options) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception& e) {
        throw ExternalExpertFailure("malformed adapter response: " + std::string(e.what()));
    }
    if (!j.is_object() || !j.contains("id") || !j.contains("scores"))
        throw ExternalExpertFailure("adapter response needs 'id' and 'scores'");
    if (!j["id"].is_number_integer() || j["id"].get<long long>() != id)
        throw ExternalExpertFailure("adapter answered id " + j["id"].dump() + ", expected " + std::to_string(id));
    const auto& scores = j["scores"];
    if (!scores.is_array() || scores.size() != options)
        throw ExternalExpertFailure("adapter must return exactly " + std::to_string(options) + " scores");
    std::vector<double> w;
    w.reserve(options);
    for (const auto& s : scores) {
        if (!s.is_number()) throw ExternalExpertFailure("adapter scores must be numbers");
        const double v = s.get<double>();
        if (!std::isfinite(v) || v < 0.0) throw ExternalExpertFailure("adapter scores must be finite and >= 0");
        w.push_back(v);
    }
    try {
        return CategoricalDistribution::from_weights(w);
    } catch (const InvalidDistribution& e) {
        throw ExternalExpertFailure(std::string("adapter scores unusable: ") + e.what());
    }
}

}  // namespace infolab

#pragma once

// External evaluator sessions over a line protocol (POSIX only).
//
//   parent -> child:  "HOSI/1 d=<d>"  once, then one line per point with d
//                     space-separated decimals
//   child -> parent:  one decimal per input line, in order
//
// The parent writes a whole batch and reads the answers concurrently, so a
// child that answers line by line never blocks on a full pipe.

#include <cerrno>
#include <charconv>
#include <chrono>
#include <csignal>
#include <cstring>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include <fcntl.h>
#include <poll.h>
#include <sys/types.h>
#include <sys/wait.h>
#include <unistd.h>

#include "hosi/core.hpp"

namespace hosi::cli {

struct ExternalOptions {
    std::string command;
    int dim = 1;
    double timeout_seconds = 30.0;
};

class ExternalError : public Error {
public:
    using Error::Error;
};

/// Shortest decimal that reads back to the same double.
inline std::string shortest_decimal(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    if (ec != std::errc()) throw Error("float formatting failed");
    return std::string(buf, ptr);
}

/// One child process speaking the protocol.
class ExternalProcess {
public:
    explicit ExternalProcess(ExternalOptions opts) : opts_(std::move(opts)) {
        std::signal(SIGPIPE, SIG_IGN);
        int in_pipe[2], out_pipe[2];
        if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw ExternalError("pipe: " + std::string(std::strerror(errno)));
        if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            throw ExternalError("pipe: " + std::string(std::strerror(errno)));
        }
        pid_ = ::fork();
        if (pid_ < 0) throw ExternalError("fork: " + std::string(std::strerror(errno)));
        if (pid_ == 0) {
            std::signal(SIGPIPE, SIG_DFL);  // an ignored disposition survives exec
            ::dup2(in_pipe[0], STDIN_FILENO);
            ::dup2(out_pipe[1], STDOUT_FILENO);
            ::close(in_pipe[0]);
            ::close(in_pipe[1]);
            ::close(out_pipe[0]);
            ::close(out_pipe[1]);
            ::execl("/bin/sh", "sh", "-c", opts_.command.c_str(), static_cast<char*>(nullptr));
            ::_exit(127);
        }
        ::close(in_pipe[0]);
        ::close(out_pipe[1]);
        to_child_ = in_pipe[1];
        from_child_ = out_pipe[0];
        ::fcntl(to_child_, F_SETFL, ::fcntl(to_child_, F_GETFL) | O_NONBLOCK);
        ::fcntl(from_child_, F_SETFL, ::fcntl(from_child_, F_GETFL) | O_NONBLOCK);
        pending_ = "HOSI/1 d=" + std::to_string(opts_.dim) + "\n";
    }

    ExternalProcess(const ExternalProcess&) = delete;
    ExternalProcess& operator=(const ExternalProcess&) = delete;

    ~ExternalProcess() {
        if (to_child_ >= 0) ::close(to_child_);
        if (from_child_ >= 0) ::close(from_child_);
        if (pid_ > 0) {
            int status = 0;
            for (int i = 0; i < 50; ++i) {
                if (::waitpid(pid_, &status, WNOHANG) != 0) return;
                ::usleep(2000);
            }
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, &status, 0);
        }
    }

    /// Evaluates vals.size() points packed in `points`.
    void evaluate(std::span<const double> points, std::span<double> vals) {
        if (broken_) throw ExternalError("external evaluator session is no longer usable");
        const auto d = static_cast<std::size_t>(opts_.dim);
        for (std::size_t i = 0; i < vals.size(); ++i) {
            for (std::size_t j = 0; j < d; ++j) {
                if (j) pending_ += ' ';
                pending_ += shortest_decimal(points[i * d + j]);
            }
            pending_ += '\n';
        }
        try {
            exchange(vals);
        } catch (...) {
            broken_ = true;
            throw;
        }
    }

private:
    void exchange(std::span<double> vals) {
        using clock = std::chrono::steady_clock;
        const auto deadline = clock::now() + std::chrono::duration<double>(opts_.timeout_seconds);
        std::size_t written = 0, got = 0;
        char buf[65536];
        while (got < vals.size() || written < pending_.size()) {
            pollfd fds[2];
            nfds_t nf = 0;
            if (written < pending_.size()) fds[nf++] = {to_child_, POLLOUT, 0};
            fds[nf++] = {from_child_, POLLIN, 0};
            const auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - clock::now()).count();
            if (left <= 0) fail_timeout(got, vals.size());
            const int r = ::poll(fds, nf, static_cast<int>(std::min<long long>(left, 1000)));
            if (r < 0) {
                if (errno == EINTR) continue;
                throw ExternalError("poll: " + std::string(std::strerror(errno)));
            }
            for (nfds_t k = 0; k < nf; ++k) {
                if (fds[k].fd == to_child_ && (fds[k].revents & (POLLOUT | POLLERR | POLLHUP))) {
                    const ssize_t w = ::write(to_child_, pending_.data() + written, pending_.size() - written);
                    if (w < 0 && errno != EAGAIN && errno != EINTR)
                        throw ExternalError("external evaluator closed its input after " + std::to_string(lines_read_) +
                                            " output lines (" + std::string(std::strerror(errno)) + ")");
                    if (w > 0) written += static_cast<std::size_t>(w);
                }
                if (fds[k].fd == from_child_ && (fds[k].revents & (POLLIN | POLLHUP | POLLERR))) {
                    const ssize_t n = ::read(from_child_, buf, sizeof buf);
                    if (n == 0) fail_exit(got, vals.size());
                    if (n < 0) {
                        if (errno == EAGAIN || errno == EINTR) continue;
                        throw ExternalError("read: " + std::string(std::strerror(errno)));
                    }
                    inbox_.append(buf, static_cast<std::size_t>(n));
                    std::size_t nl;
                    while ((nl = inbox_.find('\n')) != std::string::npos) {
                        std::string line = inbox_.substr(0, nl);
                        inbox_.erase(0, nl + 1);
                        ++lines_read_;
                        if (got >= vals.size())
                            throw ExternalError("external evaluator output line " + std::to_string(lines_read_) +
                                                ": unexpected extra line '" + line + "'");
                        vals[got++] = parse_line(line);
                    }
                }
            }
        }
        pending_.clear();
    }

    double parse_line(std::string line) const {
        while (!line.empty() && (line.back() == '\r' || line.back() == ' ' || line.back() == '\t')) line.pop_back();
        std::size_t s = 0;
        while (s < line.size() && (line[s] == ' ' || line[s] == '\t')) ++s;
        const char* first = line.data() + s;
        const char* last = line.data() + line.size();
        if (first != last && *first == '+') ++first;
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(first, last, v);
        if (ec != std::errc() || ptr != last || first == last)
            throw ExternalError("external evaluator output line " + std::to_string(lines_read_) + ": malformed value '" +
                                line + "'");
        if (!std::isfinite(v))
            throw ExternalError("external evaluator output line " + std::to_string(lines_read_) + ": non-finite value '" +
                                line + "'");
        return v;
    }

    [[noreturn]] void fail_exit(std::size_t got, std::size_t want) {
        int status = 0;
        std::string how = "closed its output";
        if (::waitpid(pid_, &status, 0) == pid_) {
            pid_ = -1;
            if (WIFEXITED(status)) how = "exited with status " + std::to_string(WEXITSTATUS(status));
            else if (WIFSIGNALED(status)) how = "was killed by signal " + std::to_string(WTERMSIG(status));
        }
        throw ExternalError("external evaluator " + how + " after output line " + std::to_string(lines_read_) + " (" +
                            std::to_string(got) + " of " + std::to_string(want) + " values in this batch)");
    }

    [[noreturn]] void fail_timeout(std::size_t got, std::size_t want) {
        throw ExternalError("external evaluator timed out after output line " + std::to_string(lines_read_) + " (" +
                            std::to_string(got) + " of " + std::to_string(want) + " values in this batch)");
    }

    ExternalOptions opts_;
    pid_t pid_ = -1;
    int to_child_ = -1;
    int from_child_ = -1;
    std::string pending_;
    std::string inbox_;
    std::size_t lines_read_ = 0;
    bool broken_ = false;
};

/// Children are started lazily and each batch runs on one idle child, so a
/// run with w worker threads holds at most w sessions.
class ExternalEvaluatorPool : public std::enable_shared_from_this<ExternalEvaluatorPool> {
public:
    explicit ExternalEvaluatorPool(ExternalOptions opts) : opts_(std::move(opts)) {
        if (opts_.command.empty()) throw Error("external evaluator command is empty");
    }

    void evaluate(std::span<const double> points, std::span<double> vals) {
        std::unique_ptr<ExternalProcess> child = acquire();
        child->evaluate(points, vals);  // a failed session is dropped, not returned
        std::lock_guard lock(mu_);
        idle_.push_back(std::move(child));
    }

    BlackBoxFunction function() {
        auto self = shared_from_this();
        return BlackBoxFunction::batched(opts_.dim, [self](std::span<const double> pts, std::span<double> vals) {
            self->evaluate(pts, vals);
        });
    }

private:
    std::unique_ptr<ExternalProcess> acquire() {
        std::unique_lock lock(mu_);
        if (!idle_.empty()) {
            auto c = std::move(idle_.back());
            idle_.pop_back();
            return c;
        }
        lock.unlock();
        return std::make_unique<ExternalProcess>(opts_);
    }

    ExternalOptions opts_;
    std::mutex mu_;
    std::vector<std::unique_ptr<ExternalProcess>> idle_;
};

}  // namespace hosi::cli

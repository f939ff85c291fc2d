#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>
#include <cctype>

#include "dsol/equiv/equiv.hpp"

namespace dsol::equiv {

namespace {

struct ProcessResult {
    bool timed_out = false;
    std::string output;
};

ProcessResult run_process(const std::string& path, const std::vector<std::string>& args, const std::string& input,
                          double timeout_s) {
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) || pipe(out_pipe) || pipe2(err_pipe, O_CLOEXEC))
        throw SolverUnavailable(std::string("pipe: ") + std::strerror(errno));

    pid_t pid = fork();
    if (pid < 0) throw SolverUnavailable(std::string("fork: ") + std::strerror(errno));
    if (pid == 0) {
        dup2(in_pipe[0], 0);
        dup2(out_pipe[1], 1);
        dup2(out_pipe[1], 2);
        close(in_pipe[1]);
        close(out_pipe[0]);
        close(err_pipe[0]);
        std::vector<char*> argv;
        argv.push_back(const_cast<char*>(path.c_str()));
        for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
        argv.push_back(nullptr);
        execvp(path.c_str(), argv.data());
        int e = errno;
        (void)!write(err_pipe[1], &e, sizeof e);
        _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);

    int exec_errno = 0;
    ssize_t n = read(err_pipe[0], &exec_errno, sizeof exec_errno);
    close(err_pipe[0]);
    if (n == sizeof exec_errno) {
        close(in_pipe[1]);
        close(out_pipe[0]);
        waitpid(pid, nullptr, 0);
        throw SolverUnavailable("cannot launch solver " + path + ": " + std::strerror(exec_errno));
    }

    signal(SIGPIPE, SIG_IGN);
    fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
    ProcessResult result;
    std::size_t written = 0;
    int in_fd = in_pipe[1];
    if (input.empty()) {
        close(in_fd);
        in_fd = -1;
    }
    auto deadline = std::chrono::steady_clock::now() + std::chrono::duration<double>(timeout_s);
    char buf[4096];
    bool out_open = true;
    while (out_open) {
        auto left = std::chrono::duration_cast<std::chrono::milliseconds>(deadline - std::chrono::steady_clock::now());
        if (left.count() <= 0) {
            result.timed_out = true;
            break;
        }
        pollfd fds[2];
        int nfds = 0;
        fds[nfds++] = {out_pipe[0], POLLIN, 0};
        if (in_fd >= 0) fds[nfds++] = {in_fd, POLLOUT, 0};
        int r = poll(fds, nfds, static_cast<int>(left.count()));
        if (r < 0 && errno == EINTR) continue;
        if (r <= 0) continue;
        if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
            ssize_t got = read(out_pipe[0], buf, sizeof buf);
            if (got > 0)
                result.output.append(buf, static_cast<std::size_t>(got));
            else
                out_open = false;
        }
        if (nfds == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
            ssize_t put = write(in_fd, input.data() + written, input.size() - written);
            if (put > 0) written += static_cast<std::size_t>(put);
            if (put < 0 && errno != EAGAIN) written = input.size();
            if (written >= input.size()) {
                close(in_fd);
                in_fd = -1;
            }
        }
    }
    if (in_fd >= 0) close(in_fd);
    close(out_pipe[0]);
    if (result.timed_out) kill(pid, SIGKILL);
    waitpid(pid, nullptr, 0);
    return result;
}

// Minimal s-expression reader for solver responses.
struct SExpr {
    std::string atom;
    std::vector<SExpr> list;
    bool is_list = false;
};

class Reader {
public:
    explicit Reader(const std::string& text) : s_(text) {}

    bool next(SExpr& out) {
        skip();
        if (i_ >= s_.size()) return false;
        out = read();
        return true;
    }

private:
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }

    SExpr read() {
        skip();
        SExpr e;
        if (i_ >= s_.size()) return e;
        if (s_[i_] == '(') {
            e.is_list = true;
            ++i_;
            skip();
            while (i_ < s_.size() && s_[i_] != ')') {
                e.list.push_back(read());
                skip();
            }
            ++i_;
            return e;
        }
        if (s_[i_] == '|') {
            auto end = s_.find('|', i_ + 1);
            e.atom = s_.substr(i_, end == std::string::npos ? std::string::npos : end - i_ + 1);
            i_ = end == std::string::npos ? s_.size() : end + 1;
            return e;
        }
        if (s_[i_] == '"') {
            auto end = s_.find('"', i_ + 1);
            e.atom = s_.substr(i_, end == std::string::npos ? std::string::npos : end - i_ + 1);
            i_ = end == std::string::npos ? s_.size() : end + 1;
            return e;
        }
        std::size_t start = i_;
        while (i_ < s_.size() && !std::isspace(static_cast<unsigned char>(s_[i_])) && s_[i_] != '(' && s_[i_] != ')')
            ++i_;
        e.atom = s_.substr(start, i_ - start);
        return e;
    }

    const std::string& s_;
    std::size_t i_ = 0;
};

std::optional<Word> parse_value(const SExpr& e) {
    if (!e.is_list) {
        if (e.atom == "true") return Word(1);
        if (e.atom == "false") return Word(0);
        if (e.atom.rfind("#x", 0) == 0) return parse_word("0x" + e.atom.substr(2));
        if (e.atom.rfind("#b", 0) == 0) {
            Word w = 0;
            for (char c : e.atom.substr(2)) w = (w << 1) | Word(c == '1' ? 1 : 0);
            return w;
        }
        return std::nullopt;
    }
    if (e.list.size() == 3 && e.list[0].atom == "_" && e.list[1].atom.rfind("bv", 0) == 0)
        return parse_word(e.list[1].atom.substr(2));
    return std::nullopt;
}

} // namespace

SolverResult solve(const Formula& phi, const SolverConfig& config) {
    SolverResult res;
    auto t0 = std::chrono::steady_clock::now();
    auto proc = run_process(config.path, config.args, phi.smt_script(), config.timeout_s);
    res.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    res.output = proc.output;
    if (proc.timed_out) {
        res.status = SolverStatus::Timeout;
        return res;
    }
    Reader reader(proc.output);
    SExpr e;
    // skip anything before the check-sat answer
    while (reader.next(e)) {
        if (e.is_list) continue;
        if (e.atom == "sat") {
            res.status = SolverStatus::Sat;
            break;
        }
        if (e.atom == "unsat") {
            res.status = SolverStatus::Unsat;
            return res;
        }
        if (e.atom == "unknown") return res;
        if (e.atom == "timeout") {
            res.status = SolverStatus::Timeout;
            return res;
        }
    }
    if (res.status != SolverStatus::Sat) return res;

    std::size_t expected = phi.vars.size();
    for (const auto& t : phi.app_terms) expected += 1 + t->args.size();
    if (expected == 0) return res;
    if (!reader.next(e) || !e.is_list || e.list.size() != expected) {
        res.status = SolverStatus::Unknown;
        return res;
    }
    std::vector<Word> values;
    for (const auto& pair : e.list) {
        std::optional<Word> v;
        if (pair.is_list && pair.list.size() == 2) v = parse_value(pair.list[1]);
        if (!v) {
            res.status = SolverStatus::Unknown;
            return res;
        }
        values.push_back(*v);
    }
    std::size_t k = 0;
    for (const auto& v : phi.vars) res.vars[v] = values[k++];
    for (const auto& t : phi.app_terms) {
        Word value = values[k++];
        std::vector<Word> args;
        for (std::size_t a = 0; a < t->args.size(); ++a) args.push_back(values[k++]);
        res.apps[t->name][args] = value;
    }
    return res;
}

} // namespace dsol::equiv

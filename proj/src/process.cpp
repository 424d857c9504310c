#include "jitvc/process.hpp"

#include <cerrno>
#include <csignal>
#include <cstring>
#include <map>

#include <fcntl.h>
#include <poll.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include "jitvc/error.hpp"

extern char** environ;

namespace jitvc {

namespace {

struct Pipe {
    int fd[2] = {-1, -1};
    Pipe() {
        if (::pipe2(fd, O_CLOEXEC) != 0) throw Error(ErrorCode::Io, std::strerror(errno));
    }
    ~Pipe() { close_all(); }
    Pipe(const Pipe&) = delete;
    Pipe& operator=(const Pipe&) = delete;
    void close_end(int i) {
        if (fd[i] >= 0) ::close(fd[i]);
        fd[i] = -1;
    }
    void close_all() {
        close_end(0);
        close_end(1);
    }
};

std::vector<std::string> merged_environment(const std::vector<std::pair<std::string, std::string>>& extra) {
    std::map<std::string, std::string> vars;
    for (char** e = environ; e != nullptr && *e != nullptr; ++e) {
        std::string entry(*e);
        auto eq = entry.find('=');
        if (eq == std::string::npos) continue;
        vars[entry.substr(0, eq)] = entry.substr(eq + 1);
    }
    for (const auto& [k, v] : extra) vars[k] = v;
    std::vector<std::string> out;
    out.reserve(vars.size());
    for (const auto& [k, v] : vars) out.push_back(k + "=" + v);
    return out;
}

}  // namespace

ProcessResult run_process(const std::vector<std::string>& argv, const ProcessOptions& options) {
    if (argv.empty()) throw Error(ErrorCode::Io, "empty argv");
    static const bool sigpipe_ignored = (std::signal(SIGPIPE, SIG_IGN), true);
    (void)sigpipe_ignored;

    Pipe in, out, err;
    posix_spawn_file_actions_t actions;
    posix_spawn_file_actions_init(&actions);
    posix_spawn_file_actions_adddup2(&actions, in.fd[0], STDIN_FILENO);
    posix_spawn_file_actions_adddup2(&actions, out.fd[1], STDOUT_FILENO);
    posix_spawn_file_actions_adddup2(&actions, err.fd[1], STDERR_FILENO);
    std::string cwd = options.cwd.string();
    if (!cwd.empty()) posix_spawn_file_actions_addchdir_np(&actions, cwd.c_str());

    std::vector<char*> args;
    for (const auto& a : argv) args.push_back(const_cast<char*>(a.c_str()));
    args.push_back(nullptr);

    std::vector<std::string> env_storage;
    std::vector<char*> envp;
    char** env_ptr = environ;
    if (!options.env.empty()) {
        env_storage = merged_environment(options.env);
        for (auto& e : env_storage) envp.push_back(e.data());
        envp.push_back(nullptr);
        env_ptr = envp.data();
    }

    pid_t pid = -1;
    int rc = posix_spawnp(&pid, args[0], &actions, nullptr, args.data(), env_ptr);
    posix_spawn_file_actions_destroy(&actions);
    if (rc != 0) throw Error(ErrorCode::Io, "cannot spawn " + argv[0] + ": " + std::strerror(rc));

    in.close_end(0);
    out.close_end(1);
    err.close_end(1);

    ProcessResult result;
    std::size_t written = 0;
    if (options.input.empty()) in.close_end(1);
    else ::fcntl(in.fd[1], F_SETFL, ::fcntl(in.fd[1], F_GETFL) | O_NONBLOCK);

    char buf[65536];
    while (out.fd[0] >= 0 || err.fd[0] >= 0) {
        pollfd fds[3];
        int nfds = 0;
        int out_idx = -1, err_idx = -1, in_idx = -1;
        if (out.fd[0] >= 0) { out_idx = nfds; fds[nfds++] = {out.fd[0], POLLIN, 0}; }
        if (err.fd[0] >= 0) { err_idx = nfds; fds[nfds++] = {err.fd[0], POLLIN, 0}; }
        if (in.fd[1] >= 0) { in_idx = nfds; fds[nfds++] = {in.fd[1], POLLOUT, 0}; }
        if (::poll(fds, nfds, -1) < 0) {
            if (errno == EINTR) continue;
            break;
        }
        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[in_idx].revents & POLLOUT) {
                ssize_t n = ::write(in.fd[1], options.input.data() + written, options.input.size() - written);
                if (n > 0) written += static_cast<std::size_t>(n);
                if (n < 0 && errno != EAGAIN && errno != EINTR) written = options.input.size();
            } else {
                written = options.input.size();
            }
            if (written >= options.input.size()) in.close_end(1);
        }
        auto drain = [&](int idx, Pipe& p, std::string& sink) {
            if (idx < 0 || !(fds[idx].revents & (POLLIN | POLLHUP | POLLERR))) return;
            ssize_t n = ::read(p.fd[0], buf, sizeof buf);
            if (n > 0) sink.append(buf, static_cast<std::size_t>(n));
            else if (n == 0 || (errno != EINTR && errno != EAGAIN)) p.close_end(0);
        };
        drain(out_idx, out, result.out);
        drain(err_idx, err, result.err);
    }
    in.close_end(1);

    int status = 0;
    while (::waitpid(pid, &status, 0) < 0 && errno == EINTR) {}
    result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : 128 + WTERMSIG(status);
    return result;
}

}  // namespace jitvc

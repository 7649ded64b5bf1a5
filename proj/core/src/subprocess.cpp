#include "tabgap/subprocess.hpp"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstring>

#include "tabgap/error.hpp"

namespace tabgap {

SubprocessResult run_with_input(const std::string& command, const std::string& input,
                                double timeout_seconds) {
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe(in_pipe) != 0 || pipe(out_pipe) != 0 || pipe(err_pipe) != 0) {
        throw IoError("pipe() failed: " + std::string(std::strerror(errno)));
    }

    const pid_t pid = fork();
    if (pid < 0) throw IoError("fork() failed: " + std::string(std::strerror(errno)));
    if (pid == 0) {
        dup2(in_pipe[0], STDIN_FILENO);
        dup2(out_pipe[1], STDOUT_FILENO);
        dup2(err_pipe[1], STDERR_FILENO);
        for (int fd : {in_pipe[0], in_pipe[1], out_pipe[0], out_pipe[1], err_pipe[0], err_pipe[1]}) {
            close(fd);
        }
        execl("/bin/sh", "sh", "-c", command.c_str(), static_cast<char*>(nullptr));
        _exit(127);
    }

    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    fcntl(in_pipe[1], F_SETFL, O_NONBLOCK);
    fcntl(out_pipe[0], F_SETFL, O_NONBLOCK);
    fcntl(err_pipe[0], F_SETFL, O_NONBLOCK);

    SubprocessResult result;
    const auto deadline = std::chrono::steady_clock::now() +
                          std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                              std::chrono::duration<double>(timeout_seconds));
    std::size_t written = 0;
    bool stdin_open = true, stdout_open = true, stderr_open = true;
    char buf[4096];

    while (stdout_open || stderr_open || stdin_open) {
        const auto now = std::chrono::steady_clock::now();
        if (now >= deadline) {
            result.timed_out = true;
            kill(pid, SIGKILL);
            break;
        }
        const int wait_ms = static_cast<int>(std::min<long long>(
            250, std::chrono::duration_cast<std::chrono::milliseconds>(deadline - now).count() + 1));

        pollfd fds[3];
        nfds_t n_fds = 0;
        int in_idx = -1, out_idx = -1, err_idx = -1;
        if (stdin_open) {
            in_idx = static_cast<int>(n_fds);
            fds[n_fds++] = {in_pipe[1], POLLOUT, 0};
        }
        if (stdout_open) {
            out_idx = static_cast<int>(n_fds);
            fds[n_fds++] = {out_pipe[0], POLLIN, 0};
        }
        if (stderr_open) {
            err_idx = static_cast<int>(n_fds);
            fds[n_fds++] = {err_pipe[0], POLLIN, 0};
        }
        const int rc = poll(fds, n_fds, wait_ms);
        if (rc < 0 && errno != EINTR) break;
        if (rc <= 0) continue;

        if (in_idx >= 0 && (fds[in_idx].revents & (POLLOUT | POLLERR | POLLHUP))) {
            if (fds[in_idx].revents & (POLLERR | POLLHUP)) {
                close(in_pipe[1]);
                stdin_open = false;
            } else {
                const ssize_t n = write(in_pipe[1], input.data() + written,
                                        std::min<std::size_t>(4096, input.size() - written));
                if (n > 0) written += static_cast<std::size_t>(n);
                if (written >= input.size() || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                    close(in_pipe[1]);
                    stdin_open = false;
                }
            }
        }
        if (out_idx >= 0 && (fds[out_idx].revents & (POLLIN | POLLHUP))) {
            const ssize_t n = read(out_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                result.out.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(out_pipe[0]);
                stdout_open = false;
            }
        }
        if (err_idx >= 0 && (fds[err_idx].revents & (POLLIN | POLLHUP))) {
            const ssize_t n = read(err_pipe[0], buf, sizeof(buf));
            if (n > 0) {
                result.err.append(buf, static_cast<std::size_t>(n));
            } else if (n == 0 || (n < 0 && errno != EAGAIN && errno != EINTR)) {
                close(err_pipe[0]);
                stderr_open = false;
            }
        }
    }
    if (stdin_open) close(in_pipe[1]);
    if (stdout_open) close(out_pipe[0]);
    if (stderr_open) close(err_pipe[0]);

    int status = 0;
    waitpid(pid, &status, 0);
    if (WIFEXITED(status)) {
        result.exit_code = WEXITSTATUS(status);
    } else if (WIFSIGNALED(status)) {
        result.exit_code = 128 + WTERMSIG(status);
    }
    return result;
}

}  // namespace tabgap

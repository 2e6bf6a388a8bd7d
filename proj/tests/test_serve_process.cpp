#include <doctest.h>

#include <httplib.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <regex>

#include <json.hpp>

#include "glyphforge/store.hpp"
#include "test_support.hpp"

extern char** environ;

using namespace glyphforge;
using namespace glyphforge::testing;
using nlohmann::json;

namespace {

// Runs `glyphforge serve` as a child process with stdout on a pipe.
class ServeProcess {
public:
    explicit ServeProcess(std::vector<std::string> args) {
        int fds[2];
        REQUIRE(::pipe(fds) == 0);
        posix_spawn_file_actions_t actions;
        posix_spawn_file_actions_init(&actions);
        posix_spawn_file_actions_adddup2(&actions, fds[1], STDOUT_FILENO);
        posix_spawn_file_actions_addclose(&actions, fds[0]);
        args.insert(args.begin(), GLYPHFORGE_CLI_PATH);
        std::vector<char*> argv;
        for (auto& a : args) argv.push_back(a.data());
        argv.push_back(nullptr);
        REQUIRE(::posix_spawn(&pid_, GLYPHFORGE_CLI_PATH, &actions, nullptr, argv.data(), environ) == 0);
        posix_spawn_file_actions_destroy(&actions);
        ::close(fds[1]);
        out_ = ::fdopen(fds[0], "r");
    }
    ~ServeProcess() {
        if (pid_ > 0) {
            ::kill(pid_, SIGKILL);
            ::waitpid(pid_, nullptr, 0);
        }
        if (out_) ::fclose(out_);
    }

    std::string read_line() {
        char buf[512];
        if (!std::fgets(buf, sizeof buf, out_)) return {};
        return buf;
    }

    int interrupt_and_wait() {
        ::kill(pid_, SIGINT);
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

    int wait() {
        int status = 0;
        ::waitpid(pid_, &status, 0);
        pid_ = -1;
        return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    }

private:
    pid_t pid_ = -1;
    FILE* out_ = nullptr;
};

int port_from_banner(const std::string& line) {
    std::smatch m;
    if (!std::regex_search(line, m, std::regex(R"(http://[^:]+:(\d+))"))) return -1;
    return std::stoi(m[1]);
}

}  // namespace

TEST_CASE("serve: new kb, classify round trip, clean shutdown on SIGINT") {
    TempDir dir;
    const auto kb = (dir / "fresh.vcrkb").string();
    ServeProcess proc({"serve", "--kb", kb, "--grid", "16x16", "--bind", "127.0.0.1:0"});
    const int port = port_from_banner(proc.read_line());
    REQUIRE(port > 0);

    httplib::Client c("127.0.0.1", port);
    auto res = c.Get("/api/labels");
    REQUIRE(res);
    CHECK(json::parse(res->body) == json::array());

    std::vector<std::string> rows(16, std::string(16, '.'));
    rows[3] = std::string(16, '#');
    res = c.Post("/api/teach", json{{"label", "bar"}, {"rows", rows}}.dump(), "application/json");
    REQUIRE(res);
    CHECK(res->status == 200);
    res = c.Post("/api/classify", json{{"rows", rows}}.dump(), "application/json");
    REQUIRE(res);
    const auto d = json::parse(res->body);
    CHECK(d["kind"] == "Match");
    CHECK(d["best"]["q_display"] == "1.00");

    CHECK(proc.interrupt_and_wait() == 0);
    const KnowledgeBase saved = load_kb(kb);
    CHECK(saved.dims() == GridDims{16, 16});
    CHECK(saved.weights(Label("bar")).teach_count() == 1);
}

TEST_CASE("serve: bind failure exits 1") {
    TempDir dir;
    // TEST-NET-1, never assigned locally; httplib's SO_REUSEPORT defeats a port clash.
    ServeProcess proc({"serve", "--kb", (dir / "k.vcrkb").string(), "--bind", "192.0.2.1:9"});
    CHECK(proc.wait() == 1);
}

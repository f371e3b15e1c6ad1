#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "sonn/signal.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>
#include <unistd.h>

namespace fs = std::filesystem;

namespace {

struct Result {
    int code = -1;
    std::string out;
    std::string err;
};

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

const fs::path& work_dir() {
    static const fs::path dir = [] {
        auto d = fs::temp_directory_path() / ("sonn_cli_" + std::to_string(::getpid()));
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

fs::path tmp(const std::string& name) { return work_dir() / name; }

Result run(const std::string& args) {
    const char* exe = std::getenv("SONN_VIBE");
    REQUIRE_MESSAGE(exe != nullptr, "SONN_VIBE must point at the sonn-vibe binary");
    const auto out = tmp("stdout.txt");
    const auto err = tmp("stderr.txt");
    const std::string cmd = std::string("\"") + exe + "\" " + args + " >\"" + out.string() + "\" 2>\"" +
                            err.string() + "\"";
    const int status = std::system(cmd.c_str());
    Result r;
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.out = slurp(out);
    r.err = slurp(err);
    return r;
}

std::string config_path() {
    const char* dir = std::getenv("SONN_CONFIG_DIR");
    return (fs::path(dir ? dir : "configs") / "default.cfg").string();
}

bool contains(const std::string& hay, const std::string& needle) { return hay.find(needle) != std::string::npos; }

}  // namespace

TEST_CASE("complexity with the default config and Q=7") {
    const auto r = run("complexity --config \"" + config_path() + "\" --q 7");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "70584"));
    const auto csv = run("complexity --q 1 --csv");
    CHECK(csv.code == 0);
    CHECK(contains(csv.out, "total,10296,"));
}

TEST_CASE("gradcheck passes") {
    const auto r = run("gradcheck --seed 1");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "max rel err < 1e-4: PASS"));
}

TEST_CASE("synth then ingest round-trips the samples") {
    const auto s = tmp("s.csv");
    const auto t = tmp("t.csv");
    REQUIRE(run("synth --class severe --kind inner --seed 7 --out \"" + s.string() + "\"").code == 0);
    const auto r = run("ingest \"" + s.string() + "\" --out \"" + t.string() + "\"");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "20480"));
    const auto a = sonn::read_recording(s, {0, 1});
    const auto b = sonn::read_recording(t, {0, 1});
    CHECK(a.channels[0].samples == b.channels[0].samples);
    CHECK(a.channels[1].samples == b.channels[1].samples);
    CHECK(slurp(s) == slurp(t));

    const auto again = tmp("s2.csv");
    REQUIRE(run("synth --class severe --kind inner --seed 7 --out \"" + again.string() + "\"").code == 0);
    CHECK(slurp(s) == slurp(again));
}

TEST_CASE("argument errors exit 1") {
    CHECK(run("").code == 1);
    CHECK(run("complexity --bogus").code == 1);
    CHECK(run("synth --kind inner").code == 1);
    CHECK(run("synth --class terrible").code == 1);
    CHECK(run("synth --class severe --kind outer").code == 1);
    CHECK(run("nonsense").code == 1);
    const auto r = run("ingest");
    CHECK(r.code == 1);
    CHECK_FALSE(r.err.empty());
}

TEST_CASE("data errors exit 2") {
    CHECK(run("ingest \"" + tmp("missing.csv").string() + "\"").code == 2);
    const auto bad = tmp("bad.csv");
    std::ofstream(bad) << "1,2\n3,x\n";
    const auto r = run("ingest \"" + bad.string() + "\"");
    CHECK(r.code == 2);
    CHECK(contains(r.err, "row 2"));
    const auto ragged = tmp("ragged.csv");
    std::ofstream(ragged) << "1,2,3\n3,4\n";
    CHECK(run("ingest \"" + ragged.string() + "\"").code == 2);
    const auto junk = tmp("junk.model");
    std::ofstream(junk) << "not a model\n";
    CHECK(run("eval --model \"" + junk.string() + "\"").code == 2);
}

TEST_CASE("help exits 0") {
    const auto r = run("--help");
    CHECK(r.code == 0);
    CHECK(contains(r.out, "train"));
}

TEST_CASE("train, eval and classify agree") {
    const auto cfg = tmp("small.cfg");
    std::ofstream(cfg) << "synth.recordings_per_class = 2\nsynth.duration_s = 0.5\nfolds = 2\nruns = 1\n"
                          "epochs = 2\n";
    const auto model = tmp("m.sonn");
    const auto log = tmp("log.csv");
    const auto t = run("train --config \"" + cfg.string() + "\" --q 2 --seed 5 --jobs 2 --model \"" +
                       model.string() + "\" --log \"" + log.string() + "\"");
    REQUIRE(t.code == 0);
    const auto marker = t.out.find("saved model (fold 0, run 0) test report\n");
    REQUIRE(marker != std::string::npos);
    const std::string trained = t.out.substr(t.out.find('\n', marker) + 1);

    const auto e = run("eval --model \"" + model.string() + "\"");
    CHECK(e.code == 0);
    CHECK(e.out == trained);
    CHECK(contains(slurp(log), "fold,run,epoch,train_loss,train_error"));

    const auto t1 = run("train --config \"" + cfg.string() + "\" --q 2 --seed 5 --jobs 1 --csv");
    const auto t3 = run("train --config \"" + cfg.string() + "\" --q 2 --seed 5 --jobs 3 --csv");
    CHECK(t1.code == 0);
    CHECK(t1.out == t3.out);

    const auto s = tmp("c.csv");
    REQUIRE(run("synth --class healthy --seed 3 --out \"" + s.string() + "\"").code == 0);
    const auto c = run("classify --model \"" + model.string() + "\" \"" + s.string() + "\" --csv");
    CHECK(c.code == 0);
    CHECK(std::count(c.out.begin(), c.out.end(), '\n') == 21);
}

TEST_CASE("flags override config values") {
    const auto cfg = tmp("q.cfg");
    std::ofstream(cfg) << "q = 7\n";
    CHECK(contains(run("complexity --config \"" + cfg.string() + "\"").out, "70584"));
    CHECK(contains(run("complexity --config \"" + cfg.string() + "\" --q 1").out, "10296"));
}

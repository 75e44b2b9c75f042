#include <doctest.h>

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>

namespace fs = std::filesystem;

namespace {

fs::path scratch() {
  const fs::path dir = fs::temp_directory_path() / "malin_exit_codes";
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

int status(const std::string& args, const std::string& env = "") {
  const std::string cmd = env + " \"" MALIN_BINARY "\" " + args + " >/dev/null 2>&1";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

void write(const fs::path& file, const std::string& text) { std::ofstream(file) << text; }

}  // namespace

TEST_CASE("malin exit statuses") {
  const fs::path dir = scratch();
  const std::string out = " --out \"" + (dir / "out").string() + "\"";

  write(dir / "ok.json", R"({"kind": "geometry", "potential": {"family": "Quadratic"}, "center": [0, 0],
                             "scales": [0.5, 0.25],
                             "assert": {"ratio": {"value": 6.283185307179586}}})");
  CHECK(status("run \"" + (dir / "ok.json").string() + "\" --assert" + out) == 0);
  CHECK(status("report \"" + (dir / "out").string() + "\"") == 0);
  CHECK(status("report \"" + (dir / "out").string() + "\" --csv") == 0);

  write(dir / "wrong.json", R"({"kind": "geometry", "potential": {"family": "Quadratic"}, "center": [0, 0],
                                "scales": [0.5], "assert": {"ratio": {"value": 7}}})");
  CHECK(status("run \"" + (dir / "wrong.json").string() + "\"" + out) == 0);
  CHECK(status("run \"" + (dir / "wrong.json").string() + "\" --assert" + out) == 1);

  write(dir / "malformed.json", "{\"kind\": ");
  CHECK(status("run \"" + (dir / "malformed.json").string() + "\"" + out) == 2);
  CHECK(status("run \"" + (dir / "missing.json").string() + "\"" + out) == 2);

  write(dir / "divb.json", R"({"kind": "solve", "potential": {"family": "Quadratic"}, "center": [0, 0],
                               "scales": [0.5], "data": {"B": ["x", "y"]}})");
  CHECK(status("run \"" + (dir / "divb.json").string() + "\"" + out) == 3);

  CHECK(status("run \"" + (dir / "ok.json").string() + "\"" + out, "MALIN_SEED=abc") == 2);
  CHECK(status("run \"" + (dir / "ok.json").string() + "\"" + out, "MALIN_SEED=12") == 0);

  fs::create_directories(dir / "empty");
  CHECK(status("report \"" + (dir / "empty").string() + "\"") == 1);
  CHECK(status("frobnicate") == 2);
}

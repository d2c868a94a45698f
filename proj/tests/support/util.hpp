#pragma once

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace testutil {

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream out;
  out << in.rdbuf();
  return out.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << content;
}

inline std::string make_temp_dir(const std::string& hint) {
  std::string tmpl = "/tmp/" + hint + "_XXXXXX";
  std::string buf = tmpl;
  if (mkdtemp(buf.data()) == nullptr) throw std::runtime_error("mkdtemp failed for " + tmpl);
  return buf;
}

struct CliResult {
  int exit_code = -1;
  std::string output;
};

// Runs the built CLI with the given argument string, merging stderr into the
// captured output.
inline CliResult run_cli(const std::string& args) {
#ifdef VERITRAIL_CLI_PATH
  std::string cmd = std::string(VERITRAIL_CLI_PATH) + " " + args + " 2>&1";
#else
  std::string cmd = "veritrail " + args + " 2>&1";
#endif
  FILE* pipe = popen(cmd.c_str(), "r");
  if (pipe == nullptr) throw std::runtime_error("popen failed: " + cmd);
  CliResult result;
  char buf[4096];
  size_t n;
  while ((n = fread(buf, 1, sizeof(buf), pipe)) > 0) result.output.append(buf, n);
  int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace testutil

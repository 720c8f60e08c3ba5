#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trimix/chain.hpp"
#include "trimix/io.hpp"

using namespace trimix;

TEST_CASE("sha256 known vectors") {
  CHECK(sha256_hex("") ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(sha256_hex("abc") ==
        "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex("The quick brown fox jumps over the lazy dog") ==
        "d7a8fbb307d7809469ca9abcb0082e4f8d5651e46d3cdb762d02d0bf37c9e592");
  // multi-block input
  std::string big(1000, 'a');
  Sha256 h;
  h.update(big.data(), big.size());
  CHECK(h.hex_digest() == sha256_hex(big));
}

TEST_CASE("doubles survive the 17-digit CSV format") {
  for (double v : {0.1, 1.0 / 3.0, 123456.789012345678, 2.2250738585072014e-308}) {
    const std::string s = format_double(v);
    CHECK(std::stod(s) == v);
  }
}

TEST_CASE("event log round trip, continuous") {
  ChainConfig cfg;
  cfg.n = 4;
  cfg.m = 5;
  cfg.variant = Variant::continuous;
  cfg.horizon = 12.5;
  cfg.seed = 314;
  cfg.stream = 2;
  const Trajectory traj = simulate_continuous(cfg);

  std::stringstream buf;
  write_event_log(buf, traj.log);
  const EventLog back = read_event_log(buf);
  CHECK(back.config.n == cfg.n);
  CHECK(back.config.m == cfg.m);
  CHECK(back.config.horizon == cfg.horizon);
  CHECK(back.config.seed == cfg.seed);
  CHECK(back.config.stream == cfg.stream);
  REQUIRE(back.events.size() == traj.log.events.size());
  for (std::size_t i = 0; i < back.events.size(); ++i) {
    CHECK(back.events[i].time == traj.log.events[i].time);  // bit-exact via shortest repr
    CHECK(back.events[i].row == traj.log.events[i].row);
    CHECK(back.events[i].sign == traj.log.events[i].sign);
  }
}

TEST_CASE("event log round trip, discrete with a start state") {
  ChainConfig cfg;
  cfg.n = 3;
  cfg.m = 7;
  cfg.variant = Variant::discrete;
  cfg.horizon = 40;
  cfg.seed = 11;
  cfg.start_upper = {1, 2, 3};
  const Trajectory traj = simulate_discrete(cfg);

  std::stringstream buf;
  write_event_log(buf, traj.log);
  const std::string first_line = buf.str().substr(0, buf.str().find('\n'));
  CHECK(first_line.find("\"step\"") == std::string::npos);  // header carries config only
  const EventLog back = read_event_log(buf);
  CHECK(back.config.start_upper == cfg.start_upper);
  REQUIRE(back.events.size() == 40);
  CHECK(replay_state(back, 40.0) == replay_state(traj.log, 40.0));
}

TEST_CASE("event log validation rejects malformed input") {
  const std::string good_header =
      R"({"schema_version":1,"type":"header","n":3,"m":5,"variant":"continuous","horizon":2.0,"seed":1,"stream":0})";
  {
    std::stringstream buf(good_header + "\n" + R"({"t":0.5,"row":7,"sign":1})" + "\n");
    CHECK_THROWS(read_event_log(buf));
  }
  {
    std::stringstream buf(good_header + "\n" + R"({"t":0.5,"row":2,"sign":0})" + "\n");
    CHECK_THROWS(read_event_log(buf));  // hold event in a continuous log
  }
  {
    std::stringstream buf(good_header + "\n" + R"({"t":0.5,"row":2,"sign":1})" + "\n" +
                          R"({"t":0.5,"row":3,"sign":1})" + "\n");
    CHECK_THROWS(read_event_log(buf));  // non-increasing times
  }
}

TEST_CASE("manifest round trip") {
  RunManifest m;
  m.command = "simulate";
  m.argv = {"simulate", "--n", "3", "--m", "5"};
  m.seed = 77;
  m.threads = 4;
  m.started_at = "2000-01-01T00:00:00Z";
  m.finished_at = "2000-01-01T00:00:01Z";
  m.outputs = {{"sim_r0000.jsonl", sha256_hex("payload")}};

  const std::string path = (std::filesystem::temp_directory_path() / "trimix_manifest_test.json").string();
  write_manifest_file(path, m);
  const RunManifest back = read_manifest_file(path);
  CHECK(back.command == m.command);
  CHECK(back.argv == m.argv);
  CHECK(back.seed == m.seed);
  CHECK(back.outputs.size() == 1);
  CHECK(back.outputs[0].path == m.outputs[0].path);
  CHECK(back.outputs[0].sha256 == m.outputs[0].sha256);
  std::filesystem::remove(path);
}

TEST_CASE("csv writer emits schema version, header and rows") {
  const std::string path = (std::filesystem::temp_directory_path() / "trimix_csv_test.csv").string();
  {
    CsvWriter csv(path, {"t", "tv"});
    csv.row({"0", format_double(0.5)});
    csv.row({"1", format_double(0.25)});
    CHECK_THROWS_AS(csv.row({"only-one"}), std::invalid_argument);
  }
  std::ifstream in(path);
  std::string line;
  std::getline(in, line);
  CHECK(line == "# schema_version=1");
  std::getline(in, line);
  CHECK(line == "t,tv");
  std::getline(in, line);
  CHECK(line == "0,0.5");
  std::filesystem::remove(path);
}

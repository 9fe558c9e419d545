#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <random>

#include "encdi/repio.hpp"
#include "helpers.hpp"

using namespace encdi;
namespace fs = std::filesystem;

namespace {
std::string tmp_path(const std::string& name) {
  return (fs::temp_directory_path() / name).string();
}
}  // namespace

TEST_CASE("binary round-trip is the identity on float32 data") {
  std::mt19937_64 rng(42);
  std::uniform_real_distribution<float> u(-100.0f, 100.0f);
  std::uniform_int_distribution<std::size_t> shape(1, 40);
  for (int trial = 0; trial < 25; ++trial) {
    RepresentationSet set(shape(rng), shape(rng));
    for (double& v : set.data) v = static_cast<double>(u(rng));
    set.encoder_label = "enc" + std::to_string(trial);
    set.split_label = SplitLabel::P2;

    auto path = tmp_path("roundtrip.repr");
    repio::write_representations(set, path);
    auto back = repio::read_representations(path);
    REQUIRE(back.n_rows == set.n_rows);
    REQUIRE(back.dim == set.dim);
    CHECK(back.data == set.data);
    CHECK(back.encoder_label == set.encoder_label);
    CHECK(back.split_label == set.split_label);
  }
}

TEST_CASE("valid REPR header is parsed") {
  RepresentationSet set(2, 3);
  for (std::size_t i = 0; i < 6; ++i) set.data[i] = static_cast<double>(i);
  auto path = tmp_path("small.repr");
  repio::write_representations(set, path);
  auto back = repio::read_representations(path);
  CHECK(back.n_rows == 2);
  CHECK(back.dim == 3);
}

TEST_CASE("bad magic raises MalformedHeader") {
  auto path = tmp_path("badmagic.repr");
  std::ofstream os(path, std::ios::binary);
  os << "REPQ" << '\x01';
  os.close();
  // Falls through to CSV parsing, which cannot parse it either.
  CHECK_THROWS_AS(repio::read_representations(path), Error);
}

TEST_CASE("short payload raises DimensionMismatch") {
  RepresentationSet set(2, 3);
  auto path = tmp_path("short.repr");
  repio::write_representations(set, path);
  // Truncate the file to 5 of the 6 payload floats.
  fs::resize_file(path, 4 + 1 + 4 + 4 + 5 * 4);
  try {
    repio::read_representations(path);
    FAIL("expected DimensionMismatch");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DimensionMismatch);
  }
}

TEST_CASE("CSV is parsed and round-trips within 1e-6") {
  auto path = tmp_path("reps.csv");
  {
    std::ofstream os(path);
    os << "1.0,2.0\n3.0,4.0\n";
  }
  auto set = repio::read_representations(path);
  REQUIRE(set.n_rows == 2);
  REQUIRE(set.dim == 2);
  CHECK(set.at(0, 0) == 1.0);
  CHECK(set.at(1, 1) == 4.0);

  auto rand_set = testutil::gaussian_set(17, 5, 7);
  auto path2 = tmp_path("rand.csv");
  repio::write_representations(rand_set, path2, repio::Format::Csv);
  auto back = repio::read_representations(path2);
  REQUIRE(back.n_rows == rand_set.n_rows);
  for (std::size_t i = 0; i < back.data.size(); ++i)
    CHECK(back.data[i] == doctest::Approx(rand_set.data[i]).epsilon(1e-6));
}

TEST_CASE("non-finite payload is rejected with its location") {
  auto path = tmp_path("nan.csv");
  {
    std::ofstream os(path);
    os << "1.0,2.0\nnan,4.0\n";
  }
  try {
    repio::read_representations(path);
    FAIL("expected NonFiniteValue");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NonFiniteValue);
    CHECK(std::string(e.what()).find("row 1") != std::string::npos);
  }
}

TEST_CASE("unwritable path raises IoFailure") {
  RepresentationSet set(1, 1);
  set.data[0] = 1.0;
  try {
    repio::write_representations(set, "/nonexistent-dir/x.repr");
    FAIL("expected IoFailure");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::IoFailure);
  }
}

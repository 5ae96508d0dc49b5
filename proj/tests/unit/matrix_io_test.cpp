#include <filesystem>
#include <fstream>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "bitalloc/matrix_io.hpp"

namespace {

using bitalloc::MatrixFormat;
using bitalloc::parse_matrix;

const std::filesystem::path kData = BITALLOC_TEST_DATA;

std::filesystem::path temp_file(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "bitalloc_matrix_io_test";
  std::filesystem::create_directories(dir);
  return dir / name;
}

std::string error_of(std::string_view text, MatrixFormat format = MatrixFormat::kAuto) {
  try {
    parse_matrix(text, format);
  } catch (const bitalloc::Error& e) {
    return e.what();
  }
  return "";
}

TEST(MatrixIo, IdentityInCoordinateForm) {
  EXPECT_EQ(bitalloc::load_matrix(kData / "identity_2x2.mtx"), Eigen::MatrixXd::Identity(2, 2));
  EXPECT_EQ(parse_matrix("2 2 2\n1 1 1\n2 2 1\n"), Eigen::MatrixXd::Identity(2, 2));
}

TEST(MatrixIo, CoordinateDetails) {
  const Eigen::MatrixXd sym = parse_matrix(
      "%%MatrixMarket matrix coordinate real symmetric\n% comment\n3 3 2\n2 1 -4\n3 3 5\n");
  EXPECT_EQ(sym(0, 1), -4.0);
  EXPECT_EQ(sym(1, 0), -4.0);
  EXPECT_EQ(sym(2, 2), 5.0);
  // Duplicates are summed.
  EXPECT_EQ(parse_matrix("1 1 2\n1 1 1.5\n1 1 2\n")(0, 0), 3.5);
}

TEST(MatrixIo, ErrorsCarryLineNumbers) {
  EXPECT_NE(error_of("2 2 2\n1 1 1\n3 1 1\n").find("line 3"), std::string::npos);
  EXPECT_NE(error_of("2 2 3\n1 1 1\n2 2 1\n").find("3"), std::string::npos);
  EXPECT_NE(error_of("1,2\n3\n", MatrixFormat::kDense).find("line 2"), std::string::npos);
  EXPECT_NE(error_of("1,x\n", MatrixFormat::kDense).find("line 1"), std::string::npos);
  EXPECT_FALSE(error_of("%%MatrixMarket matrix array real general\n1 1\n1\n").empty());
}

TEST(MatrixIo, DenseWithComments) {
  const Eigen::MatrixXd m = bitalloc::load_matrix(kData / "sensing_2x2.csv");
  EXPECT_EQ(m(0, 1), -0.25);
  EXPECT_EQ(m(1, 1), 2.0);
}

TEST(MatrixIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd a(7, 5);
  for (Eigen::Index i = 0; i < a.size(); ++i) a.data()[i] = normal(rng) * std::pow(10.0, (i % 9) - 4);
  a(3, 2) = 0.0;

  const auto dense = temp_file("round_trip.csv");
  bitalloc::save_matrix(dense, a);
  EXPECT_EQ(bitalloc::load_matrix(dense), a);

  const auto coordinate = temp_file("round_trip.mtx");
  bitalloc::save_matrix_coordinate(coordinate, a);
  EXPECT_EQ(bitalloc::load_matrix(coordinate), a);
}

TEST(MatrixIo, VectorsAndMissingFiles) {
  EXPECT_EQ(bitalloc::load_vector(kData / "kappa_2.csv"), Eigen::Vector2d(0.9, 1.1));
  const auto row = temp_file("row.csv");
  std::ofstream(row) << "1,2,3\n";
  EXPECT_EQ(bitalloc::load_vector(row), Eigen::Vector3d(1, 2, 3));
  EXPECT_THROW(bitalloc::load_vector(kData / "sensing_2x2.csv"), bitalloc::Error);
  EXPECT_THROW(bitalloc::load_matrix(kData / "does_not_exist.csv"), bitalloc::Error);
}

}  // namespace

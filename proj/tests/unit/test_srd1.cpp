#include <gtest/gtest.h>

#include <cstring>
#include <filesystem>
#include <limits>

#include "properties.hpp"
#include "shredrom/csv.hpp"
#include "shredrom/error.hpp"
#include "shredrom/srd1.hpp"

using namespace shredrom;

namespace {

TensorFile sample_file() {
  TensorFile f;
  Matrix m(2, 3);
  m << 1, 2, 3, 4, 5, 6;
  f.add("m", Tensor::from_matrix(m));
  f.add("s", Tensor::scalar(-0.5));
  return f;
}

}  // namespace

TEST(Srd1, HeaderLayout) {
  const std::string bytes = sample_file().encode();
  EXPECT_EQ(bytes.substr(0, 4), "SRD1");
  EXPECT_EQ(bytes[4], 1);
  EXPECT_EQ(bytes[8], 2);
  // name length, name, dtype, ndim, dims.
  EXPECT_EQ(bytes[12], 1);
  EXPECT_EQ(bytes[14], 'm');
  EXPECT_EQ(bytes[15], 0);
  EXPECT_EQ(bytes[16], 2);
  EXPECT_EQ(bytes[17], 2);
  EXPECT_EQ(bytes[25], 3);
  double second = 0.0;
  std::memcpy(&second, bytes.data() + 33 + 8, 8);
  EXPECT_EQ(second, 2.0);  // row-major payload
  EXPECT_EQ(bytes.size(), 12u + (2 + 1 + 1 + 1 + 16 + 48) + (2 + 1 + 1 + 1 + 8 + 8));
}

TEST(Srd1, RowMajorMatrixRoundTrip) {
  const TensorFile f = sample_file();
  const Matrix m = f.get("m").to_matrix();
  EXPECT_EQ(m(1, 0), 4.0);
  EXPECT_EQ(f.get("m").data[1], 2.0);
  EXPECT_TRUE(TensorFile::decode(f.encode()) == f);
  EXPECT_THROW(f.get("s").to_matrix(), FormatError);
  EXPECT_THROW(f.get("missing"), FormatError);
}

TEST(Srd1, BitwiseRoundTripProperty) {
  for (std::uint64_t seed = 1; seed <= 20; ++seed) EXPECT_TRUE(props::srd1_roundtrip_bitwise(seed)) << seed;
}

TEST(Srd1, FileRoundTrip) {
  const auto path = std::filesystem::temp_directory_path() / "shredrom_test_srd1.srd1";
  sample_file().write(path);
  EXPECT_TRUE(TensorFile::read(path) == sample_file());
  std::filesystem::remove(path);
  EXPECT_THROW(TensorFile::read(path), FormatError);
}

TEST(Srd1, CorruptInputsRejected) {
  const std::string good = sample_file().encode();
  std::string bad = good;
  bad[0] = 'X';
  EXPECT_THROW(TensorFile::decode(bad), FormatError);
  bad = good;
  bad[4] = 2;
  EXPECT_THROW(TensorFile::decode(bad), FormatError);
  bad = good;
  bad[15] = 1;
  EXPECT_THROW(TensorFile::decode(bad), FormatError);
  for (std::size_t cut : {std::size_t{0}, std::size_t{3}, std::size_t{10}, good.size() - 1}) {
    EXPECT_THROW(TensorFile::decode(good.substr(0, cut)), FormatError) << cut;
  }
  EXPECT_THROW(TensorFile::decode(good + "x"), FormatError);
  bad = good;
  bad[8] = 3;
  EXPECT_THROW(TensorFile::decode(bad), FormatError);
  bad = good;
  bad[16] = 1;  // ndim 1 reads the 3 as payload and misaligns the rest
  EXPECT_THROW(TensorFile::decode(bad), FormatError);
  bad = good;
  bad[17 + 7] = static_cast<char>(0x40);  // huge first dim
  EXPECT_THROW(TensorFile::decode(bad), FormatError);
}

TEST(Srd1, DuplicateNamesRejected) {
  TensorFile f = sample_file();
  EXPECT_THROW(f.add("m", Tensor::scalar(1.0)), InvalidArgument);
  EXPECT_THROW(f.add("", Tensor::scalar(1.0)), InvalidArgument);
  EXPECT_THROW(f.add("x", Tensor{{2, 2}, {1.0}}), DimensionError);
  std::string bytes = sample_file().encode();
  bytes[83] = 'm';  // rename "s" to "m"
  EXPECT_THROW(TensorFile::decode(bytes), FormatError);
}

TEST(Csv, FormatParseRoundTrip) {
  for (double v : {0.1, -0.0, 1e-310, 1.0 / 3.0, 6.02214076e23, std::numeric_limits<double>::max()}) {
    const double back = parse_double(format_double(v));
    EXPECT_EQ(std::memcmp(&back, &v, 8), 0) << format_double(v);
  }
  EXPECT_EQ(format_double(0.5), "0.5");
  EXPECT_EQ(format_double(std::numeric_limits<double>::infinity()), "inf");
  EXPECT_TRUE(std::isnan(parse_double("nan")));
  EXPECT_THROW(parse_double("1.0x"), FormatError);
  EXPECT_THROW(parse_double(""), FormatError);
  EXPECT_EQ(split_csv_line("a,,b\r"), (std::vector<std::string>{"a", "", "b"}));
}

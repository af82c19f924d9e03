#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <sstream>

#include "mphate/error.hpp"
#include "mphate/random.hpp"
#include "mphate/trace.hpp"
#include "oracles.hpp"

using namespace mphate;

namespace {

TimeTrace small_trace() {
  // 2 epochs, 2 units, 3 samples; float32-representable values.
  std::vector<double> data = {1, 2, 3, 0.5, -1, 4, 2, 2.5, 0, -3, 1, 0.25};
  return TimeTrace(2, 2, 3, data, {0, 1}, std::vector<EpochRecord>{{1.5, 0.25, 2, 0.5}, {0.75, 0.5, 1, 0.75}},
                   std::vector<int>{0, 1, 1});
}

std::string bytes_of(const TimeTrace& trace, const TraceMetadata& meta) {
  std::ostringstream out(std::ios::binary);
  write_trace(out, trace, meta);
  return out.str();
}

}  // namespace

TEST(Trace, IndexingIsEpochMajor) {
  const TimeTrace t = small_trace();
  EXPECT_EQ(t.at(0, 1, 2), 4.0);
  EXPECT_EQ(t.at(1, 0, 1), 2.5);
  EXPECT_EQ(t.points().row(3)(0), -3.0);
  EXPECT_EQ(t.trajectory(1)(1, 2), 0.25);
  EXPECT_EQ(t.slice(1)(0, 0), 2.0);
}

TEST(Trace, ConstructorRejectsInconsistentShapes) {
  EXPECT_THROW(TimeTrace(2, 2, 3, std::vector<double>(11), {0, 0}), ConsistencyError);
  EXPECT_THROW(TimeTrace(2, 2, 3, std::vector<double>(12), {0}), ConsistencyError);
  std::vector<double> bad(12, 0.0);
  bad[5] = NAN;
  EXPECT_THROW(TimeTrace(2, 2, 3, bad, {0, 0}), ValidationError);
}

TEST(Trace, ValidateRequiresTwoOfEachAxis) {
  EXPECT_THROW(TimeTrace(1, 2, 2, std::vector<double>(4, 1.0), {0, 0}).validate(), ValidationError);
  EXPECT_NO_THROW(small_trace().validate());
}

TEST(Zscore, SymmetricHandCase) {
  const TimeTrace t(2, 2, 3, {1, 2, 3, 3, 1, 2, 2, 3, 1, 1, 3, 2}, {0, 0});
  const TimeTrace z = zscore(t);
  EXPECT_TRUE(z.zscored());
  const double s = 1.0 / std::sqrt(2.0 / 3.0);
  EXPECT_NEAR(z.at(0, 0, 0), -s, 1e-12);
  EXPECT_NEAR(z.at(0, 0, 1), 0.0, 1e-12);
  EXPECT_NEAR(z.at(0, 0, 2), s, 1e-12);
  EXPECT_NEAR(s, 1.2247, 1e-4);
}

TEST(Zscore, DegenerateRowNamesEpochAndUnit) {
  const TimeTrace t(2, 2, 3, {1, 2, 3, 4, 5, 6, 5, 5, 5, 1, 0, 1}, {0, 0});
  try {
    zscore(t);
    FAIL() << "expected DegenerateUnitError";
  } catch (const DegenerateUnitError& e) {
    EXPECT_EQ(e.epoch(), 1u);
    EXPECT_EQ(e.unit(), 0u);
  }
}

TEST(Zscore, IdempotentAndPreservesFields) {
  const TimeTrace z = zscore(small_trace());
  const TimeTrace zz = zscore(TimeTrace(2, 2, 3, {z.data().begin(), z.data().end()}, z.unit_layer()));
  for (std::size_t k = 0; k < z.data().size(); ++k) EXPECT_NEAR(z.data()[k], zz.data()[k], 1e-10);
  EXPECT_EQ(z.unit_layer(), small_trace().unit_layer());
  EXPECT_EQ(z.sample_labels(), small_trace().sample_labels());
  EXPECT_EQ(z.epoch_losses(), small_trace().epoch_losses());
  EXPECT_NO_THROW(z.validate());
}

TEST(Zscore, CommutesWithSamplePermutation) {
  const TimeTrace t = oracle::random_trace(3, 4, 7, 11);
  const std::vector<std::size_t> perm = {3, 0, 6, 1, 5, 2, 4};
  std::vector<double> permuted(t.data().size());
  for (std::size_t r = 0; r < 12; ++r) {
    for (std::size_t k = 0; k < 7; ++k) permuted[r * 7 + k] = t.data()[r * 7 + perm[k]];
  }
  const TimeTrace a = zscore(TimeTrace(3, 4, 7, permuted, t.unit_layer()));
  const TimeTrace b = zscore(t);
  for (std::size_t r = 0; r < 12; ++r) {
    for (std::size_t k = 0; k < 7; ++k) EXPECT_NEAR(a.data()[r * 7 + k], b.data()[r * 7 + perm[k]], 1e-12);
  }
}

TEST(Zscore, FlaggedTraceMustBeNormalized) {
  TimeTrace bad(2, 2, 3, {1, 2, 3, 1, 2, 3, 1, 2, 3, 1, 2, 3}, {0, 0}, std::nullopt, std::nullopt, true);
  EXPECT_THROW(bad.validate(), ValidationError);
}

TEST(DropDeadUnits, RemovesAndReportsDegenerateUnits) {
  const TimeTrace t(2, 3, 3, {1, 2, 3, 7, 7, 7, 0, 1, 0, 3, 2, 1, 1, 2, 1, 5, 4, 5}, {0, 0, 1});
  const auto [kept, dropped] = drop_dead_units(t);
  EXPECT_EQ(dropped, std::vector<std::size_t>{1});
  EXPECT_EQ(kept.n_units(), 2u);
  EXPECT_EQ(kept.unit_layer(), (std::vector<int>{0, 1}));
  EXPECT_EQ(kept.at(1, 1, 2), 5.0);
}

TEST(MostActiveLabel, SeparableAndTieCases) {
  // unit 0 fires only on label-3 samples; unit 1 is flat.
  const TimeTrace t(2, 2, 4, {0, 0, 0, 0, 0, 0, 0, 0, 0, 1, 0, 1, 2, 2, 2, 2}, {0, 0}, std::nullopt,
                    std::vector<int>{0, 3, 1, 3});
  EXPECT_EQ(most_active_label(t, 0), 3);
  EXPECT_EQ(most_active_label(t, 1), 0);
}

TEST(MostActiveLabel, MatchesDirectMeans) {
  // Label means at the final epoch: 0 -> 0.2, 1 -> 0.9.
  const TimeTrace t(2, 2, 4, {9, 9, 0, 0, 1, 2, 3, 4, 0.1, 0.3, 0.8, 1.0, 1, 1, 0, 0}, {0, 0}, std::nullopt,
                    std::vector<int>{0, 0, 1, 1});
  EXPECT_EQ(most_active_label(t, 0), 1);
  EXPECT_EQ(most_active_label(t, 1), 0);
  EXPECT_THROW(most_active_label(oracle::random_trace(2, 2, 2, 1), 0), ValidationError);
}

TEST(TraceFormat, HeaderLayoutIsLittleEndian) {
  const std::string b = bytes_of(small_trace(), {});
  ASSERT_GE(b.size(), 4u + 4 + 24 + 48 + 8);
  EXPECT_EQ(b.substr(0, 4), "MPHT");
  const unsigned char* u = reinterpret_cast<const unsigned char*>(b.data());
  EXPECT_EQ(u[4], 1);
  EXPECT_EQ(u[5] | u[6] | u[7], 0);
  EXPECT_EQ(u[8], 2);   // n
  EXPECT_EQ(u[16], 2);  // m
  EXPECT_EQ(u[24], 3);  // p
  float first = 0.0f;
  std::memcpy(&first, b.data() + 32, 4);
  EXPECT_EQ(first, 1.0f);
  std::uint64_t meta_len = 0;
  std::memcpy(&meta_len, b.data() + 32 + 48, 8);
  EXPECT_EQ(meta_len, b.size() - (32 + 48 + 8));
  const std::string meta = b.substr(32 + 48 + 8);
  for (const char* key : {"\"unit_layer\"", "\"epoch_losses\"", "\"sample_labels\"", "\"task_switches\"",
                          "\"zscored\"", "\"annotations\""}) {
    EXPECT_NE(meta.find(key), std::string::npos) << key;
  }
}

TEST(TraceFormat, RoundTripIsExact) {
  TraceMetadata meta;
  meta.layer_boundaries = {0, 1, 2};
  meta.optimizer = "adam";
  meta.task_switches = {1};
  meta.annotations["preset"] = "x";
  const TimeTrace t = small_trace();
  std::istringstream in(bytes_of(t, meta));
  const auto [t2, meta2] = read_trace(in);
  EXPECT_EQ(t2, t);
  EXPECT_EQ(meta2, meta);
}

TEST(TraceFormat, RoundTripRandomFloat32Payload) {
  Rng rng(5);
  std::vector<double> data(3 * 4 * 5);
  for (double& x : data) x = static_cast<double>(static_cast<float>(standard_normal(rng)));
  const TimeTrace t(3, 4, 5, data, {0, 0, 1, 1});
  std::istringstream in(bytes_of(t, {}));
  EXPECT_EQ(read_trace(in).first.data().size(), data.size());
  std::istringstream again(bytes_of(t, {}));
  const auto back = read_trace(again).first;
  for (std::size_t k = 0; k < data.size(); ++k) EXPECT_EQ(back.data()[k], data[k]);
}

TEST(TraceFormat, WritesAreDeterministic) {
  EXPECT_EQ(bytes_of(small_trace(), {}), bytes_of(small_trace(), {}));
}

TEST(TraceFormat, InvalidTraceWritesNothing) {
  std::ostringstream out;
  const TimeTrace empty(0, 2, 2, {}, {0, 0});
  EXPECT_THROW(write_trace(out, empty, {}), ValidationError);
  EXPECT_TRUE(out.str().empty());
}

TEST(TraceFormat, ReadErrors) {
  std::string good = bytes_of(small_trace(), {});
  std::string bad_magic = good;
  bad_magic.replace(0, 4, "XXXX");
  std::istringstream a(bad_magic);
  EXPECT_THROW(read_trace(a), FormatError);

  std::istringstream b(good.substr(0, 32 + 20));
  EXPECT_THROW(read_trace(b), LengthError);

  std::string huge = good;
  const std::uint64_t big = std::uint64_t{1} << 62;
  std::memcpy(huge.data() + 8, &big, 8);
  std::istringstream c(huge);
  EXPECT_THROW(read_trace(c), ConsistencyError);

  std::string version = good;
  version[4] = 2;
  std::istringstream d(version);
  EXPECT_THROW(read_trace(d), FormatError);
}

TEST(TraceMetadata, SwitchesMustIncreaseWithinRange) {
  TraceMetadata meta;
  meta.task_switches = {2, 1};
  EXPECT_THROW(meta.validate(4), ValidationError);
  meta.task_switches = {1, 4};
  EXPECT_THROW(meta.validate(4), ValidationError);
  meta.task_switches = {1, 3};
  EXPECT_NO_THROW(meta.validate(4));
}

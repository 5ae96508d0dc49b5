#include <sstream>
#include <string>

#include <nlohmann/json.hpp>
#include <gtest/gtest.h>

#include "bitalloc/records.hpp"

namespace {

using bitalloc::Record;
using bitalloc::ResultTable;

TEST(Records, FormatsRoundTrip) {
  for (const double v : {0.1, 1.0 / 3.0, 1e-300, -2.5e17}) {
    EXPECT_EQ(std::stod(bitalloc::format_double(v)), v);
  }
  EXPECT_EQ(bitalloc::format_double(std::nan("")), "nan");
  EXPECT_EQ(bitalloc::format_vector(Eigen::Vector3d(1, 0.5, 2)), "1 0.5 2");
}

TEST(Records, CsvUnionOfColumnsAndQuoting) {
  ResultTable table;
  table.add(Record().set("trial", std::int64_t{0}).set("note", std::string("a,b")));
  table.add(Record().set("trial", std::int64_t{1}).set("solve_seconds", 0.25));
  EXPECT_EQ(table.to_csv(), "trial,note,solve_seconds\n0,\"a,b\",\n1,,0.25\n");
  EXPECT_EQ(table.to_csv(false), "trial,note\n0,\"a,b\"\n1,\n");
}

TEST(Records, NumberLookup) {
  Record row;
  row.set("x", 2.5).set("n", std::int64_t{3}).set("s", std::string("ok")).set("x", 4.0);
  EXPECT_EQ(row.number("x"), 4.0);
  EXPECT_EQ(row.number("n"), 3.0);
  EXPECT_TRUE(std::isnan(row.number("s")));
  EXPECT_TRUE(std::isnan(row.number("missing")));
  EXPECT_EQ(row.fields().size(), 3u);
}

TEST(Records, TraceLinesAreJson) {
  bitalloc::SolveTrace trace;
  bitalloc::IterationRecord it;
  it.iteration = 4;
  it.objective = 0.5;
  it.gap = std::numeric_limits<double>::infinity();
  it.lipschitz_estimate = 2.0;
  trace.iterates.push_back(it);
  std::ostringstream out;
  bitalloc::write_trace_jsonl(out, trace, 7, "fw");
  const auto line = nlohmann::json::parse(out.str());
  EXPECT_EQ(line.at("trial"), 7);
  EXPECT_EQ(line.at("solver"), "fw");
  EXPECT_EQ(line.at("iteration"), 4);
  EXPECT_TRUE(line.at("gap").is_null());
  EXPECT_EQ(line.at("lipschitz_estimate"), 2.0);
  EXPECT_FALSE(line.contains("barrier_mu"));
}

}  // namespace

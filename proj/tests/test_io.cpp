#include "dmr/io.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <fstream>

namespace dmr {
namespace {

std::string write_temp(const std::string& name, const std::string& content) {
    const std::string path = std::string(::testing::TempDir()) + name;
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    out << content;
    return path;
}

TEST(IngestTest, EmptyFileGivesEmptyLog) {
    InteractionLog log = parse_log_text("");
    EXPECT_EQ(log.user_count(), 0u);
    EXPECT_EQ(log.interaction_count(), 0u);
}

TEST(IngestTest, HeaderLineIsAutoDetected) {
    InteractionLog log = parse_log_text("user,item,timestamp,click\n1,10,100,1\n");
    EXPECT_EQ(log.user_count(), 1u);
    EXPECT_EQ(log.interaction_count(), 1u);
}

TEST(IngestTest, OutOfOrderLinesAreResorted) {
    InteractionLog log = parse_log_text(
        "1,30,300,1\n"
        "1,10,100,0\n"
        "1,20,200,1\n");
    const auto& xs = log.at(1).interactions;
    ASSERT_EQ(xs.size(), 3u);
    EXPECT_EQ(xs[0].timestamp, 100);
    EXPECT_EQ(xs[1].timestamp, 200);
    EXPECT_EQ(xs[2].timestamp, 300);
}

TEST(IngestTest, TimestampTiesBreakByItemId) {
    InteractionLog log = parse_log_text("1,30,100,1\n1,10,100,0\n");
    const auto& xs = log.at(1).interactions;
    EXPECT_EQ(xs[0].item, 10);
    EXPECT_EQ(xs[1].item, 30);
}

TEST(IngestTest, DuplicateTripleNamesTheLine) {
    try {
        parse_log_text("1,10,100,1\n1,11,101,0\n1,10,100,0\n");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
    }
}

TEST(IngestTest, NegativeTimestampRejected) {
    EXPECT_THROW(parse_log_text("1,10,-5,1\n"), DataError);
}

TEST(IngestTest, MalformedLineNamesTheLine) {
    try {
        parse_log_text("1,10,100,1\n1,oops,100,1\n");
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("line 2"), std::string::npos) << e.what();
    }
}

TEST(IngestTest, ClickFieldMustBeBinary) {
    EXPECT_THROW(parse_log_text("1,10,100,2\n"), DataError);
}

TEST(IngestTest, OptionalCategoryColumn) {
    InteractionLog log = parse_log_text("1,10,100,1,3\n1,11,101,0\n");
    const auto& xs = log.at(1).interactions;
    EXPECT_EQ(xs[0].category, 3);
    EXPECT_FALSE(xs[1].has_category());
}

TEST(ValidateTest, CollectsFirstViolations) {
    const std::string path = write_temp("bad_log.csv",
                                        "1,10,100,1\n"
                                        "garbage\n"
                                        "1,10,100,1\n"
                                        "2,5,-1,0\n");
    IngestReport report = validate_log(path, {}, 10);
    EXPECT_FALSE(report.ok());
    ASSERT_EQ(report.violations.size(), 3u);
    EXPECT_EQ(report.violations[0].line, 2u);
    EXPECT_EQ(report.violations[1].line, 3u);
    EXPECT_EQ(report.violations[2].line, 4u);
}

TEST(ValidateTest, CleanFileReportsCounts) {
    const std::string path = write_temp("good_log.csv", "1,10,100,1\n2,10,99,0\n");
    InteractionLog log;
    IngestReport report = validate_log(path, {}, 10, &log);
    EXPECT_TRUE(report.ok());
    EXPECT_EQ(report.n_users, 2u);
    EXPECT_EQ(report.n_items, 1u);
    EXPECT_EQ(report.n_interactions, 2u);
    EXPECT_EQ(log.user_count(), 2u);
}

TEST(RoundTripTest, SerializeThenIngestIsIdentity) {
    InteractionLog log = parse_log_text(
        "7,3,50,1,2\n"
        "7,9,10,0\n"
        "2,3,5,1,2\n"
        "2,4,5,0,1\n");
    const std::string text = serialize_log(log);
    InteractionLog again = parse_log_text(text);
    EXPECT_TRUE(log == again);
    EXPECT_EQ(serialize_log(again), text);
}

TEST(RoundTripTest, TabDelimiter) {
    InteractionLog log = parse_log_text("1\t10\t100\t1\n", {'\t'});
    EXPECT_EQ(log.interaction_count(), 1u);
    InteractionLog again = parse_log_text(serialize_log(log, '\t'), {'\t'});
    EXPECT_TRUE(log == again);
}

}  // namespace
}  // namespace dmr

#include <gtest/gtest.h>

#include "phishtriage/dataset.hpp"
#include "phishtriage/error.hpp"
#include "phishtriage/fs_util.hpp"
#include "phishtriage/pipeline.hpp"
#include "test_paths.hpp"

namespace phishtriage {
namespace {

ColumnMapping subject_body_class() {
  ColumnMapping m;
  m.subject = "subject";
  m.body = "body";
  m.label = "class";
  return m;
}

TEST(Tabular, CsvLabelsMapDirectly) {
  const auto load = parse_tabular_dataset("subject,body,class\nHello,pay now,phishing\nLunch,see you,legit\n",
                                          TabularFormat::Csv, subject_body_class());
  ASSERT_EQ(load.records.size(), 2u);
  EXPECT_EQ(load.records[0].label, Label::Phishing);
  EXPECT_EQ(load.records[1].label, Label::Legit);
  EXPECT_EQ(load.records[0].subject, "Hello");
  EXPECT_EQ(load.records[0].body_text, "pay now");
}

TEST(Tabular, JsonWithoutSubjectOrSender) {
  ColumnMapping m;
  m.body = "text";
  m.label = "label";
  const auto load = parse_tabular_dataset(R"([{"text":"hello","label":"ham"}])", TabularFormat::Json, m);
  ASSERT_EQ(load.records.size(), 1u);
  EXPECT_EQ(load.records[0].subject, "");
  EXPECT_EQ(load.records[0].label, Label::Legit);
  EXPECT_EQ(normalize_record(load.records[0], "hello").email_text, "SUBJECT: , FROM: , EMAIL: hello");
}

TEST(Tabular, FraudIsPhishing) {
  const auto load =
      parse_tabular_dataset("subject,body,class\nx,y,fraud\n", TabularFormat::Csv, subject_body_class());
  ASSERT_EQ(load.records.size(), 1u);
  EXPECT_EQ(load.records[0].label, Label::Phishing);
}

TEST(Tabular, UnknownColumnIsFatal) {
  ColumnMapping m = subject_body_class();
  m.sender = "from";
  try {
    parse_tabular_dataset("subject,body,class\nx,y,spam\n", TabularFormat::Csv, m);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnknownColumn);
  }
}

TEST(Tabular, BadRowsAreCollected) {
  const auto load = parse_tabular_dataset("subject,body,class\na,b,phishing\nc,d,maybe\ne,f,legit\n",
                                          TabularFormat::Csv, subject_body_class());
  EXPECT_EQ(load.rows, 3u);
  EXPECT_EQ(load.records.size(), 2u);
  ASSERT_EQ(load.failures.size(), 1u);
  EXPECT_EQ(load.failures[0].row, 2u);
  EXPECT_EQ(load.records.size(), load.rows - load.failures.size());
}

TEST(Tabular, UnreadableFile) {
  try {
    load_tabular_dataset("/nonexistent/file.csv", TabularFormat::Csv, subject_body_class());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnreadableFile);
  }
}

TEST(Tabular, CustomSynonyms) {
  LabelSynonyms syn = LabelSynonyms::parse("bad = Phishing\ngood = Legit\n");
  const auto load =
      parse_tabular_dataset("subject,body,class\na,b,BAD\n", TabularFormat::Csv, subject_body_class(), syn);
  ASSERT_EQ(load.records.size(), 1u);
  EXPECT_EQ(load.records[0].label, Label::Phishing);
}

TEST(Normalize, Format) {
  EmailRecord rec;
  rec.subject = "Hi";
  rec.sender = "a@b.c";
  EXPECT_EQ(normalize_record(rec, "pay now").email_text, "SUBJECT: Hi, FROM: a@b.c, EMAIL: pay now");
  EXPECT_EQ(normalize_record(EmailRecord{}, "").email_text, "SUBJECT: , FROM: , EMAIL: ");
}

TEST(Normalize, BodyIsNeverReSplit) {
  EmailRecord rec;
  rec.subject = "x, FROM: y, EMAIL: z";
  rec.sender = "s@t.u";
  const UniformRecord u = normalize_record(rec, "the body");
  EXPECT_EQ(u.body(), "the body");
  EXPECT_EQ(u.email_text.rfind("SUBJECT: ", 0), 0u);
}

TEST(RecordFromEml, IdIsStable) {
  const std::string raw = testing::read_fixture("facebook_spoof.eml");
  const EmailRecord a = record_from_eml(raw, "pot");
  const EmailRecord b = record_from_eml(raw, "pot");
  const EmailRecord c = record_from_eml(raw, "other");
  EXPECT_EQ(a.id, b.id);
  EXPECT_NE(a.id, c.id);
  EXPECT_EQ(a.sender, "Facebook <5a83h@92e4fsmb2e.com>");
  EXPECT_TRUE(a.body_html.has_value());
}

TEST(Pipeline, SpoofFixtureEndToEnd) {
  const PreparedEmail p = prepare_email(record_from_eml(testing::read_fixture("facebook_spoof.eml"), "fixture"));
  EXPECT_FALSE(p.null_body);
  EXPECT_EQ(p.record.email_text.rfind("SUBJECT: New login to your Facebook account, FROM: Facebook <5a83h@92e4fsmb2e.com>, EMAIL: ", 0), 0u);
  EXPECT_EQ(p.reduced.hidden_text_removals, 1u);
  EXPECT_EQ(p.record.email_text.find("verified notice"), std::string::npos);
  EXPECT_NE(p.record.email_text.find("<img src=\"http://thema214.com/track/o49\">"), std::string::npos);
  EXPECT_EQ(p.record.email_text.find('\n'), std::string::npos);
}

TEST(Pipeline, UndeclaredBase64Body) {
  EmailRecord rec;
  rec.body_text = "PGI+SGVsbG8gdGhlcmU8L2I+IGZyaWVuZA==";  // "<b>Hello there</b> friend"
  const PreparedEmail p = prepare_email(rec);
  EXPECT_EQ(p.record.body(), "Hello there friend");
}

TEST(Pipeline, NullBody) {
  EmailRecord rec;
  rec.null_body = true;
  EXPECT_TRUE(prepare_email(rec).null_body);
}

}  // namespace
}  // namespace phishtriage

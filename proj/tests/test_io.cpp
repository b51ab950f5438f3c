#include <filesystem>
#include <fstream>

#include <gtest/gtest.h>

#include "wsoleval/error.hpp"
#include "wsoleval/io.hpp"

namespace wsoleval {
namespace {

namespace fs = std::filesystem;

class IoTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("wsoleval_io_" + std::string(::testing::UnitTest::GetInstance()->current_test_info()->name()));
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }
  std::string path(const std::string& name) const { return (dir_ / name).string(); }
  fs::path dir_;
};

TEST_F(IoTest, WslmRoundTrip) {
  const LocMap m(3, 2, {0.0, 0.25, 1.5, -2.0, 7.0, 0.125});
  write_wslm(path("m.wslm"), m);
  EXPECT_EQ(fs::file_size(path("m.wslm")), 4u + 1 + 4 + 4 + 6 * 4);
  const LocMap back = read_wslm(path("m.wslm"));
  EXPECT_EQ(back.width(), 3u);
  EXPECT_EQ(back.height(), 2u);
  EXPECT_EQ(back.values(), m.values());
  EXPECT_EQ(read_locmap(path("m.wslm")).values(), m.values());
}

TEST_F(IoTest, WslmWrongMagicAndTruncation) {
  write_text_file(path("bad.wslm"), "WSLX\x01");
  try {
    read_wslm(path("bad.wslm"));
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("magic"), std::string::npos);
  }
  const LocMap m(4, 4, std::vector<double>(16, 0.5));
  write_wslm(path("t.wslm"), m);
  fs::resize_file(path("t.wslm"), fs::file_size(path("t.wslm")) - 3);
  EXPECT_THROW(read_wslm(path("t.wslm")), ValidationError);
  EXPECT_THROW(read_wslm(path("missing.wslm")), IoError);
}

TEST_F(IoTest, PngGrayscale8And16Bit) {
  const std::vector<std::uint16_t> v8{0, 51, 255, 102};
  write_png_gray(path("a.png"), 2, 2, v8, 8);
  const auto a = read_png_map(path("a.png"));
  EXPECT_DOUBLE_EQ(a.values()[1], 51.0 / 255.0);
  EXPECT_DOUBLE_EQ(a.values()[2], 1.0);

  const std::vector<std::uint16_t> v16{0, 65535, 1000, 30000, 7, 9};
  write_png_gray(path("b.png"), 3, 2, v16, 16);
  const auto b = read_locmap(path("b.png"));
  EXPECT_EQ(b.width(), 3u);
  EXPECT_DOUBLE_EQ(b.values()[2], 1000.0 / 65535.0);
  EXPECT_DOUBLE_EQ(b.values()[1], 1.0);
}

TEST_F(IoTest, PpmRoundTripAndAscii) {
  const RgbImage img(2, 1, {1, 2, 3, 250, 251, 252});
  write_ppm(path("x.ppm"), img);
  EXPECT_EQ(read_image(path("x.ppm")).data(), img.data());
  write_text_file(path("y.ppm"), "P3\n# comment\n2 1\n255\n1 2 3 4 5 6\n");
  const auto y = read_image(path("y.ppm"));
  EXPECT_EQ(y.data(), (std::vector<std::uint8_t>{1, 2, 3, 4, 5, 6}));
}

TEST_F(IoTest, BoxRowsParseAndRoundTrip) {
  const std::string text =
      R"({"image_id":"a","x_min":1,"y_min":2,"x_max":5,"y_max":6,"image_width":10,"image_height":10}

{"image_id":"b","x_min":-2,"y_min":0,"x_max":30,"y_max":6,"image_width":20,"image_height":10}
{"image_id":"c","x_min":1}
)";
  const auto rep = parse_box_rows(text, RowSchema::Box);
  ASSERT_EQ(rep.rows.size(), 2u);
  EXPECT_EQ(rep.rows[1].line, 3u);
  EXPECT_EQ(rep.rows[1].box, BBox(0, 0, 20, 6));
  ASSERT_EQ(rep.issues.size(), 1u);
  EXPECT_EQ(rep.issues[0].line, 4u);

  write_box_rows(path("rows.jsonl"), rep.rows);
  const auto back = read_box_rows(path("rows.jsonl"), RowSchema::Box);
  ASSERT_EQ(back.rows.size(), 2u);
  EXPECT_EQ(back.rows[0].box, rep.rows[0].box);
  EXPECT_EQ(back.rows[1].image_width, 20);

  const auto gt = gt_boxes_from_rows(back.rows);
  EXPECT_EQ(gt[0].image_height, 10);
  EXPECT_EQ(rows_from_gt_boxes(gt)[1].box, BBox(0, 0, 20, 6));
}

TEST_F(IoTest, ProposalSchemaRequiresObjectnessAndSource) {
  const auto rep = parse_box_rows(
      R"({"image_id":"a","x_min":1,"y_min":2,"x_max":5,"y_max":6}
{"image_id":"a","x_min":1,"y_min":2,"x_max":5,"y_max":6,"objectness":0.3,"source":"rpn","classifier_score":"high"}
)",
      RowSchema::Proposal);
  EXPECT_TRUE(rep.rows.empty());
  EXPECT_EQ(rep.issues.size(), 2u);
}

TEST_F(IoTest, GtRowsWithoutDimsAreRejected) {
  const auto rep = parse_box_rows(R"({"image_id":"a","x_min":1,"y_min":2,"x_max":5,"y_max":6})", RowSchema::Box);
  EXPECT_THROW(gt_boxes_from_rows(rep.rows), ValidationError);
}

TEST_F(IoTest, PseudoBoxRowCarriesTrace) {
  AnnotationOutcome o{"img", BBox(1, 1, 4, 4), ProposalSource::RPN, 0.5, 0.25, {10, 2, 1, 1, 1, false, false}};
  const auto j = box_row_json(pseudo_box_row(o));
  EXPECT_EQ(j["source"], "rpn");
  EXPECT_EQ(j["stage_trace"]["top_fraction"], 2);
  EXPECT_EQ(j["stage_trace"]["final"], 1);
  EXPECT_EQ(j["classifier_score"], 0.25);
}

TEST_F(IoTest, PerImageCsv) {
  EvalResult r;
  r.delta = 0.5;
  r.per_image = {{"a", 0.75, true}, {"b", 0.25, false}};
  EXPECT_EQ(per_image_csv(r), "image_id,iou,hit\na,0.75,1\nb,0.25,0\n");
}

TEST_F(IoTest, RunManifestJson) {
  const auto j = nlohmann::json::parse(R"({
    "run_id": "r1", "config": {"lr": 0.01, "arch": "vgg"}, "grid": 3,
    "splits": {
      "val":  [{"epoch": 0, "classification_acc": 0.5, "curves": {"ss": [0.1, 0.2, 0.3]}},
               {"epoch": 2, "classification_acc": 0.6, "loc_scores": {"ss": 0.4}}],
      "test": [{"epoch": 0, "classification_acc": 0.5, "otsu_scores": {"oracle": 0.2}},
               {"epoch": 2, "classification_acc": 0.6}]
    }})");
  const RunManifest run = run_manifest_from_json(j);
  EXPECT_EQ(run.grid.size(), 3u);
  EXPECT_EQ(run.config.at("arch"), "vgg");
  EXPECT_EQ(run.val[1].loc_scores.at("ss"), 0.4);
  const RunManifest again = run_manifest_from_json(run_manifest_json(run));
  EXPECT_EQ(again.val[0].curves, run.val[0].curves);
  EXPECT_EQ(again.test[0].otsu_scores, run.test[0].otsu_scores);

  auto bad = j;
  bad["splits"]["test"][1]["epoch"] = 3;
  EXPECT_THROW(run_manifest_from_json(bad), ValidationError);
  bad = j;
  bad.erase("run_id");
  EXPECT_THROW(run_manifest_from_json(bad), ValidationError);
}

TEST_F(IoTest, FormatDouble) {
  EXPECT_EQ(format_double(0.1), "0.1");
  EXPECT_EQ(format_double(1.0), "1");
  EXPECT_EQ(std::stod(format_double(1.0 / 3.0)), 1.0 / 3.0);
}

TEST_F(IoTest, JsonFileRoundTrip) {
  write_json_file(path("a.json"), {{"x", 1}});
  EXPECT_EQ(read_json_file(path("a.json"))["x"], 1);
  const auto text = read_text_file(path("a.json"));
  EXPECT_EQ(text.back(), '\n');
  write_text_file(path("b.json"), "{not json");
  EXPECT_THROW(read_json_file(path("b.json")), ValidationError);
}

}  // namespace
}  // namespace wsoleval

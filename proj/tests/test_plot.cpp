#include <gtest/gtest.h>

#include <regex>
#include <sstream>

#include "test_support.hpp"
#include "vitalnet/error.hpp"
#include "vitalnet/plot.hpp"

namespace vitalnet::plot {
namespace {

std::size_t count(const std::string& text, const std::string& needle) {
  std::size_t n = 0;
  for (auto pos = text.find(needle); pos != std::string::npos; pos = text.find(needle, pos + 1)) ++n;
  return n;
}

std::string render_text(Kind kind, const std::string& csv) {
  std::istringstream in(csv);
  return render(kind, in);
}

std::string sweep_csv() {
  std::string csv = "days,n_windows,accuracy,auc\n";
  for (int d = 2; d <= 28; d += 2) {
    csv += std::to_string(d) + "," + std::to_string(d * 3) + ",0." + std::to_string(60 + d) + ",0." +
           std::to_string(70 + d) + "\n";
  }
  return csv;
}

TEST(Plot, SweepHasOnePointPerRowAndSeries) {
  const std::string svg = render_text(Kind::sweep, sweep_csv());
  EXPECT_EQ(count(svg, "<circle data-series=\"accuracy\""), 14u);
  EXPECT_EQ(count(svg, "<circle data-series=\"auc\""), 14u);
  EXPECT_EQ(count(svg, "<polyline"), 2u);
  EXPECT_NE(svg.find("width=\"800\" height=\"600\""), std::string::npos);
}

TEST(Plot, EmbeddingMarkerPerRowColoredByLabel) {
  const std::string csv =
      "window_index,patient_id,label,y1,y2\n"
      "0,P1,0,1.0,2.0\n"
      "1,P1,0,1.5,2.5\n"
      "2,P2,1,-3.0,0.5\n";
  const std::string svg = render_text(Kind::embedding, csv);
  EXPECT_EQ(count(svg, "<circle"), 3u);
  EXPECT_EQ(count(svg, "<circle data-series=\"label-0\""), 2u);
  EXPECT_EQ(count(svg, "<circle data-series=\"label-1\""), 1u);
  const std::regex fill("label-1\"[^>]*fill=\"([^\"]+)\"");
  std::smatch m1;
  ASSERT_TRUE(std::regex_search(svg, m1, fill));
  const std::regex fill0("label-0\"[^>]*fill=\"([^\"]+)\"");
  std::smatch m0;
  ASSERT_TRUE(std::regex_search(svg, m0, fill0));
  EXPECT_NE(m0[1].str(), m1[1].str());
}

TEST(Plot, HistoryAndBoxplotRender) {
  const std::string history = render_text(Kind::history, "epoch,loss,accuracy\n1,0.69,0.5\n2,0.4,0.8\n");
  EXPECT_EQ(count(history, "<polyline"), 2u);
  const std::string box =
      render_text(Kind::boxplot, "label,q1,median,q3,whisker_lo,whisker_hi\n0,50,55,60,40,70\n1,44,47,50,35,58\n");
  EXPECT_GE(count(box, "<rect"), 3u);
}

TEST(Plot, Deterministic) {
  EXPECT_EQ(render_text(Kind::sweep, sweep_csv()), render_text(Kind::sweep, sweep_csv()));
}

TEST(Plot, SchemaMismatchNamesExpectedHeader) {
  try {
    render_text(Kind::sweep, "epoch,loss,accuracy\n1,0.5,0.5\n");
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("days,n_windows,accuracy,auc"), std::string::npos);
  }
  EXPECT_THROW(render_text(Kind::sweep, "days,n_windows,accuracy,auc\n"), ValidationError);
  EXPECT_THROW(render_text(Kind::sweep, "days,n_windows,accuracy,auc\n2,3,abc,0.5\n"), ParseError);
  EXPECT_THROW(render_text(Kind::sweep, "days,n_windows,accuracy,auc\n2,3,0.5\n"), ParseError);
  EXPECT_THROW(kind_from_string("pie"), ValidationError);
  EXPECT_EQ(kind_from_string("boxplot"), Kind::boxplot);
}

TEST(Plot, FileRoundTrip) {
  const auto dir = testing::fresh_dir("plot");
  testing::write_file(dir / "sweep.csv", sweep_csv());
  render_file(Kind::sweep, dir / "sweep.csv", dir / "sweep.svg");
  EXPECT_EQ(testing::read_file(dir / "sweep.svg"), render_text(Kind::sweep, sweep_csv()));
  EXPECT_THROW(render_file(Kind::sweep, dir / "none.csv", dir / "x.svg"), ValidationError);
}

}  // namespace
}  // namespace vitalnet::plot

// Copyright 2026 The mlsreenact Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "../oracles.hpp"
#include "mlsr/error.hpp"
#include "mlsr/flow_io.hpp"
#include "mlsr/image_io.hpp"
#include "mlsr/points_document.hpp"

namespace fs = std::filesystem;

namespace mlsr {
namespace {

class TempDir {
 public:
  TempDir() {
    oracle::Rng rng(reinterpret_cast<std::uintptr_t>(this));
    path_ = fs::temp_directory_path() / ("mlsr_io_" + std::to_string(rng.bits()));
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

ImageBuffer gradient(int w, int h, int c) {
  ImageBuffer img(w, h, c);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int k = 0; k < c; ++k) {
        img.set(x, y, k, static_cast<float>((x * 7 + y * 13 + k * 29) % 256) / 255.0f);
      }
    }
  }
  return img;
}

TEST(Image, ClampsAndScrubsValues) {
  ImageBuffer img(2, 1, 1, std::vector<float>{1.5f, NAN});
  EXPECT_EQ(img.at(0, 0, 0), 1.0f);
  EXPECT_EQ(img.at(1, 0, 0), 0.0f);
  img.set(0, 0, 0, -3.0f);
  EXPECT_EQ(img.at(0, 0, 0), 0.0f);
  EXPECT_THROW(ImageBuffer(2, 2, 2), InvalidInputError);
  EXPECT_THROW(ImageBuffer(2, 2, 1, std::vector<float>(3)), ShapeError);
}

TEST(Png, EightBitRoundTripIsExact) {
  for (int channels : {1, 3, 4}) {
    const ImageBuffer img = gradient(13, 7, channels);
    const DecodedImage back = decode_png(encode_png(img, 8));
    EXPECT_EQ(back.bit_depth, 8);
    EXPECT_EQ(back.image, img) << channels << " channels";
  }
}

TEST(Png, SixteenBitKeepsPrecision) {
  ImageBuffer img(3, 1, 1, std::vector<float>{0.0f, 12345.0f / 65535.0f, 1.0f});
  const DecodedImage back = decode_png(encode_png(img, 16));
  EXPECT_EQ(back.bit_depth, 16);
  for (int x = 0; x < 3; ++x) EXPECT_NEAR(back.image.at(x, 0, 0), img.at(x, 0, 0), 1e-7);
}

TEST(Png, EncodingIsDeterministic) {
  const ImageBuffer img = gradient(31, 17, 3);
  EXPECT_EQ(encode_png(img), encode_png(img));
}

TEST(Png, ErrorsAreTyped) {
  const std::vector<std::uint8_t> junk{1, 2, 3, 4, 5, 6, 7, 8, 9};
  EXPECT_THROW(decode_png(junk), FormatError);
  auto bytes = encode_png(gradient(8, 8, 3));
  bytes.resize(bytes.size() / 2);
  EXPECT_THROW(decode_png(bytes), FormatError);
  EXPECT_THROW(read_png("/nonexistent/dir/image.png"), IoError);
  EXPECT_THROW(encode_png(gradient(2, 2, 1), 12), InvalidInputError);
}

TEST(Png, FileRoundTrip) {
  TempDir dir;
  const ImageBuffer img = gradient(9, 5, 3);
  write_png(dir / "a.png", img);
  EXPECT_EQ(read_png(dir / "a.png").image, img);
}

TEST(FlowFile, BinaryRoundTripAtFloatPrecision) {
  TempDir dir;
  oracle::Rng rng(71);
  std::vector<Point2> map;
  for (int i = 0; i < 80 * 70; ++i) map.push_back(rng.point(-0.5, 1.5));
  const FlowField flow(80, 70, map);
  write_flow(dir / "f.flow", flow);
  const FlowField back = read_flow(dir / "f.flow");
  ASSERT_EQ(back.width(), 80);
  ASSERT_EQ(back.height(), 70);
  for (std::size_t i = 0; i < map.size(); ++i) {
    EXPECT_EQ(back.values()[i].x, static_cast<double>(static_cast<float>(map[i].x)));
  }
  std::ifstream in(dir / "f.flow", std::ios::binary);
  std::string header;
  std::getline(in, header);
  EXPECT_NE(header.find("\"f32le\""), std::string::npos);
}

TEST(FlowFile, SmallFieldsUseJson) {
  TempDir dir;
  const FlowField flow = FlowField::identity(4, 3);
  // Both encodings carry float32 samples. The volatile store keeps the
  // optimizer from folding the narrowing away.
  std::vector<Point2> rounded;
  for (Point2 p : flow.values()) {
    volatile float fx = static_cast<float>(p.x);
    volatile float fy = static_cast<float>(p.y);
    rounded.push_back({fx, fy});
  }
  const FlowField expect(4, 3, rounded);
  write_flow(dir / "f.json", flow);
  std::ifstream in(dir / "f.json");
  EXPECT_EQ(in.get(), '{');
  EXPECT_EQ(read_flow(dir / "f.json"), expect);
  EXPECT_EQ(flow_from_json(flow_to_json(flow)), expect);
  EXPECT_THROW(flow_to_json(FlowField::identity(65, 2)), InvalidInputError);
}

TEST(FlowFile, RejectsForeignData) {
  EXPECT_THROW(flow_from_json("{\"format\": \"other\"}"), FormatError);
  EXPECT_THROW(flow_from_json("{not json"), ParseError);
  try {
    flow_from_json(R"({"format":"mlsr-flow","version":1,"width":2,"height":1,"data":[1,2,3]})");
    FAIL() << "short data accepted";
  } catch (const FormatError& e) {
    EXPECT_EQ(e.field(), "data");
  }
}

TEST(PointsDoc, ParsesAndRoundTrips) {
  const std::string text = R"({
    "n": 3, "alpha": 0.5, "mode": "similarity",
    "source": [[0.1, 0.2], [0.3, 0.4], [0.5, 0.6]],
    "driving": [[0.2, 0.2], [0.4, 0.4], [0.6, 0.6]],
    "masks": {"foreground": "fg.png"}
  })";
  const PointsDocument doc = parse_points_document(text);
  EXPECT_EQ(doc.n(), 3u);
  EXPECT_EQ(doc.alpha, 0.5);
  EXPECT_EQ(doc.mode, TransformMode::kSimilarity);
  EXPECT_EQ(doc.driving[2], (Point2{0.6, 0.6}));
  ASSERT_TRUE(doc.masks.foreground.has_value());
  EXPECT_EQ(*doc.masks.foreground, "fg.png");
  EXPECT_EQ(parse_points_document(to_json(doc)), doc);
}

TEST(PointsDoc, ExternalMatrix) {
  const PointsDocument doc = parse_points_document(R"({
    "mode": "external", "external_m": [[1, 0.5], [0, 1]],
    "source": [[0.5, 0.5]], "driving": [[0.4, 0.4]]})");
  ASSERT_TRUE(doc.external_m.has_value());
  EXPECT_EQ(doc.external_m->m[1], 0.5);
  EXPECT_THROW(parse_points_document(R"({"mode": "external",
    "source": [[0.5, 0.5]], "driving": [[0.4, 0.4]]})"), InvalidInputError);
}

TEST(PointsDoc, SchemaViolationsAreInputErrors) {
  EXPECT_THROW(parse_points_document(R"({"source": [[0.1, 0.1]], "driving": []})"),
               InvalidInputError);
  EXPECT_THROW(parse_points_document(
                   R"({"n": 2, "source": [[0.1, 0.1]], "driving": [[0.1, 0.1]]})"),
               InvalidInputError);
  EXPECT_THROW(parse_points_document(R"({"source": [[1.5, 0.1]], "driving": [[0.1, 0.1]]})"),
               InvalidInputError);
  EXPECT_THROW(parse_points_document(R"({"source": [[0.1]], "driving": [[0.1, 0.1]]})"),
               InvalidInputError);
  EXPECT_THROW(parse_points_document(
                   R"({"mode": "warp", "source": [[0.1, 0.1]], "driving": [[0.1, 0.1]]})"),
               Error);
  EXPECT_THROW(parse_points_document("[1, 2]"), InvalidInputError);
}

TEST(PointsDoc, MalformedJsonReportsLocation) {
  try {
    parse_points_document("{\n  \"source\": [[0.1, 0.2]\n");
    FAIL() << "malformed JSON accepted";
  } catch (const ParseError& e) {
    EXPECT_EQ(exit_code_for(e.kind()), 2);
    EXPECT_NE(std::string(e.what()).find("line 3"), std::string::npos) << e.what();
  }
}

TEST(PointsDoc, IdentityDefault) {
  const PointsDocument doc = PointsDocument::identity();
  EXPECT_EQ(doc.n(), 10u);
  EXPECT_EQ(doc.source, doc.driving);
  EXPECT_NO_THROW(doc.validate());
}

TEST(PointsDoc, FileRoundTrip) {
  TempDir dir;
  const PointsDocument doc = PointsDocument::identity(4);
  save_points_document(doc, dir / "p.json");
  EXPECT_EQ(load_points_document(dir / "p.json"), doc);
  EXPECT_THROW(load_points_document(dir / "missing.json"), IoError);
}

TEST(TrackDoc, FramesShareSourceAndSettings) {
  const TrackDocument t = parse_track_document(R"({
    "alpha": 1, "mode": "affine",
    "source": [[0.1, 0.1], [0.9, 0.1], [0.5, 0.9]],
    "frames": [{"driving": [[0.1, 0.1], [0.9, 0.1], [0.5, 0.9]]},
               {"driving": [[0.2, 0.1], [0.9, 0.2], [0.5, 0.8]]}]})");
  ASSERT_EQ(t.frames.size(), 2u);
  const PointsDocument f1 = t.frame(1);
  EXPECT_EQ(f1.source, t.source);
  EXPECT_EQ(f1.driving[0], (Point2{0.2, 0.1}));
  EXPECT_EQ(parse_track_document(to_json(t)).frames, t.frames);
  EXPECT_THROW(parse_track_document(R"({"source": [[0.1, 0.1]], "frames": []})"),
               InvalidInputError);
  EXPECT_THROW(parse_track_document(
                   R"({"source": [[0.1, 0.1]], "frames": [{"driving": [[0.1, 0.1], [0.2, 0.2]]}]})"),
               InvalidInputError);
}

TEST(ExitCodes, MatchContract) {
  EXPECT_EQ(exit_code_for(ErrorKind::kInvalidInput), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::kParse), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::kShape), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::kFormat), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::kConfiguration), 2);
  EXPECT_EQ(exit_code_for(ErrorKind::kDegenerate), 3);
  EXPECT_EQ(exit_code_for(ErrorKind::kIo), 4);
}

}  // namespace
}  // namespace mlsr

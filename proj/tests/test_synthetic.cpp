#include <cmath>
#include <filesystem>
#include <string>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <mmg/mmg.hpp>

#include "temp_dir.hpp"

namespace {

mmg::SyntheticSpec disjoint_spec(std::size_t m, double acc, std::size_t n, std::size_t cls,
                                 std::uint64_t seed) {
    mmg::SyntheticSpec s;
    s.samples = n;
    s.classes = cls;
    s.accuracy.assign(m, acc);
    s.overlap.assign(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) s.overlap[i * m + i] = 1.0;
    s.seed = seed;
    return s;
}

double single_accuracy(const mmg::AlignedPredictions& a, const std::string& name) {
    return mmg::evaluate_top1(mmg::average_fuse(a, {name}), *a.labels).top1;
}

}  // namespace

TEST_CASE("synthetic spec validation") {
    mmg::SyntheticSpec s = disjoint_spec(2, 0.7, 10, 3, 1);
    CHECK_NOTHROW(mmg::validate_spec(s));

    mmg::SyntheticSpec bad = s;
    bad.samples = 0;
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.classes = 1;
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.accuracy.clear();
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.accuracy[0] = 0.0;
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.accuracy[0] = 1.2;
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.overlap.pop_back();
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ShapeError);
    bad = s;
    bad.overlap[0] = 0.9;
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.overlap[1] = 0.4;  // breaks symmetry
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.overlap[1] = bad.overlap[2] = 1.5;
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ValidationError);
    bad = s;
    bad.modality_names = {"only-one"};
    CHECK_THROWS_AS(mmg::validate_spec(bad), mmg::ShapeError);

    SECTION("error sets too large for the overlap target are infeasible") {
        mmg::SyntheticSpec inf = disjoint_spec(2, 0.1, 10, 3, 1);
        CHECK_THROWS_AS(mmg::validate_spec(inf), mmg::FeasibilityError);
        CHECK_THROWS_AS(mmg::gen_predictions(inf), mmg::FeasibilityError);
    }
}

TEST_CASE("perfect accuracy targets produce error-free predictions") {
    const mmg::AlignedPredictions a = mmg::gen_predictions(disjoint_spec(2, 1.0, 50, 4, 3));
    CHECK(single_accuracy(a, "m0") == 1.0);
    CHECK(single_accuracy(a, "m1") == 1.0);
    const auto [w, report] = mmg::search_weights(a, {});
    CHECK(report.top1 == 1.0);
}

TEST_CASE("generated sample ids and shapes") {
    const mmg::AlignedPredictions a = mmg::gen_predictions(disjoint_spec(2, 0.8, 5, 3, 11));
    CHECK(a.sample_ids ==
          std::vector<std::string>{"s000000", "s000001", "s000002", "s000003", "s000004"});
    CHECK(a.modality_names == std::vector<std::string>{"m0", "m1"});
    CHECK(a.class_count == 3);
    REQUIRE(a.labels.has_value());
    CHECK(a.labels->size() == 5);
    for (std::size_t m = 0; m < 2; ++m) {
        REQUIRE(a.probs[m].size() == 15);
        for (std::size_t i = 0; i < 5; ++i) {
            double sum = 0.0;
            for (double v : a.row(m, i)) {
                sum += v;
                CHECK((std::fabs(v - 0.7) <= 1e-15 || std::fabs(v - 0.15) <= 1e-15));
            }
            REQUIRE(std::fabs(sum - 1.0) <= 1e-12);
        }
    }

    SECTION("custom modality names flow through") {
        mmg::SyntheticSpec s = disjoint_spec(2, 0.8, 5, 3, 11);
        s.modality_names = {"left", "right"};
        CHECK(mmg::gen_predictions(s).modality_names ==
              std::vector<std::string>{"left", "right"});
    }
}

TEST_CASE("gen_predictions is deterministic in the seed") {
    const mmg::SyntheticSpec s = disjoint_spec(3, 0.7, 100, 6, 77);
    const mmg::AlignedPredictions a = mmg::gen_predictions(s);
    const mmg::AlignedPredictions b = mmg::gen_predictions(s);
    CHECK(a.probs == b.probs);
    CHECK(a.sample_ids == b.sample_ids);
    CHECK(*a.labels == *b.labels);

    mmg::SyntheticSpec other = s;
    other.seed = 78;
    CHECK(mmg::gen_predictions(other).probs != a.probs);
}

TEST_CASE("accuracy targets are realized within sampling error") {
    const mmg::AlignedPredictions a = mmg::gen_predictions(disjoint_spec(3, 0.65, 2000, 10, 2026));
    const double band = 2.0 / std::sqrt(2000.0);
    for (const char* name : {"m0", "m1", "m2"})
        CHECK(std::fabs(single_accuracy(a, name) - 0.65) <= band);
}

TEST_CASE("complementary errors make fusion beat every single modality") {
    const mmg::AlignedPredictions a = mmg::gen_predictions(disjoint_spec(3, 0.65, 2000, 10, 2026));
    const double fused =
        mmg::evaluate_top1(mmg::average_fuse(a, {"m0", "m1", "m2"}), *a.labels).top1;
    double best_single = 0.0;
    for (const char* name : {"m0", "m1", "m2"})
        best_single = std::max(best_single, single_accuracy(a, name));
    CHECK(fused >= 0.85);
    CHECK(fused - best_single >= 0.10);

    const auto [w, report] = mmg::search_weights(a, {});
    CHECK(report.top1 >= fused - 1e-12);
}

TEST_CASE("full overlap at equal accuracy leaves fusion nothing to gain") {
    mmg::SyntheticSpec s;
    s.samples = 800;
    s.classes = 5;
    s.accuracy = {0.7, 0.7};
    s.overlap = {1.0, 1.0, 1.0, 1.0};
    s.seed = 12;
    const mmg::AlignedPredictions a = mmg::gen_predictions(s);
    CHECK(a.probs[0] == a.probs[1]);

    const double best_single =
        std::max(single_accuracy(a, "m0"), single_accuracy(a, "m1"));
    const auto [w, report] = mmg::search_weights(a, {});
    CHECK(std::fabs(report.top1 - best_single) <= 0.005);
}

TEST_CASE("toy video closed forms") {
    mmg::ToyVideoParams p;
    p.frames = 3;
    p.height = 6;
    p.width = 6;
    p.base = 0.2;
    p.dot_amp = 0.5;
    const mmg::VideoTensor dot = mmg::gen_toy_video("moving-dot", p);
    CHECK(dot.at(0, 2, 2, 0) == 0.7);  // dot starts centered on (2,2)
    const double dx = 2.0;
    const double expected =
        0.2 + 0.5 * std::exp(-(dx * dx) / (2.0 * p.dot_sigma * p.dot_sigma));
    CHECK(dot.at(0, 2, 4, 0) == expected);
    // after one frame the dot has drifted by (vx, vy)
    const double expected_t1 =
        0.2 + 0.5 * std::exp(-(p.dot_vx * p.dot_vx + p.dot_vy * p.dot_vy) /
                             (2.0 * p.dot_sigma * p.dot_sigma));
    CHECK(dot.at(1, 2, 2, 0) == expected_t1);
    for (std::size_t c = 1; c < 3; ++c) CHECK(dot.at(0, 2, 2, c) == dot.at(0, 2, 2, 0));

    CHECK_THROWS_AS(mmg::gen_toy_video("sparkle", p), mmg::ValidationError);
    mmg::ToyVideoParams hot = p;
    hot.base = 0.8;
    CHECK_THROWS_AS(mmg::gen_toy_video("moving-dot", hot), mmg::ValidationError);
    mmg::ToyVideoParams dark = p;
    dark.base = -0.1;
    CHECK_THROWS_AS(mmg::gen_toy_video("static", dark), mmg::ValidationError);
    mmg::ToyVideoParams flat = p;
    flat.frames = 0;
    CHECK_THROWS_AS(mmg::gen_toy_video("static", flat), mmg::ValidationError);
}

TEST_CASE("toy skeleton grid and circle kinds") {
    mmg::ToySkeletonParams p;
    p.frames = 4;
    p.keypoints = 20;
    const mmg::SkeletonSequence s = mmg::gen_toy_skeleton("static", p);
    REQUIRE(s.keypoint_count == 20);
    REQUIRE(s.frames.size() == 4);
    CHECK(s.frames[0][0].x == 4.0);
    CHECK(s.frames[0][0].y == 4.0);
    CHECK(s.frames[0][5].x == 19.0);   // column 5
    CHECK(s.frames[0][13].x == 7.0);   // wraps to column 1
    CHECK(s.frames[0][13].y == 7.0);   // row 1
    CHECK(s.frames[0][7].c == 0.9);
    CHECK(s.frames[3][13].x == s.frames[0][13].x);

    SECTION("circle gesture moves exactly one keypoint on the circle") {
        mmg::ToySkeletonParams c = p;
        c.moving_index = 3;
        c.turns = 2.0;
        const mmg::SkeletonSequence g = mmg::gen_toy_skeleton("circle-gesture", c);
        CHECK(g.frames[0][3].x == 34.0);  // angle 0: center + radius
        CHECK(g.frames[0][3].y == 24.0);
        for (std::size_t t = 0; t < 4; ++t) {
            const double angle = 2.0 * 3.14159265358979323846 * c.turns *
                                 static_cast<double>(t) / static_cast<double>(c.frames);
            CHECK(g.frames[t][3].x == c.center_x + c.radius * std::cos(angle));
            CHECK(g.frames[t][3].y == c.center_y + c.radius * std::sin(angle));
            CHECK(g.frames[t][4].x == s.frames[t][4].x);  // the rest stay on the grid
        }
    }

    SECTION("bad parameters are rejected") {
        CHECK_THROWS_AS(mmg::gen_toy_skeleton("spiral", p), mmg::ValidationError);
        mmg::ToySkeletonParams bad = p;
        bad.moving_index = 20;
        CHECK_THROWS_AS(mmg::gen_toy_skeleton("circle-gesture", bad), mmg::ValidationError);
        bad = p;
        bad.frames = 0;
        CHECK_THROWS_AS(mmg::gen_toy_skeleton("static", bad), mmg::ValidationError);
    }
}

TEST_CASE("synthetic dataset round-trips through the manifest") {
    testutil::TempDir dir("synthdata");
    mmg::SyntheticDatasetParams p;
    p.samples = 20;
    p.classes = 4;
    p.video_frames = 6;
    p.video_size = 8;
    p.skeleton_frames = 6;
    const mmg::DatasetManifest written = mmg::write_synthetic_dataset(dir.path(), p);

    REQUIRE(written.entries.size() == 20);
    CHECK(written.class_count == 4);
    const mmg::DatasetManifest loaded = mmg::load_manifest(dir / "manifest.jsonl");
    REQUIRE(loaded.entries.size() == 20);
    const char* cycle[5] = {"train", "train", "train", "val", "test"};
    for (std::size_t i = 0; i < 20; ++i) {
        CHECK(loaded.entries[i].id == written.entries[i].id);
        CHECK(loaded.entries[i].label == i % 4);
        CHECK(loaded.entries[i].split == cycle[i % 5]);
    }
    CHECK(loaded.entries[0].id == "g0000");
    CHECK(loaded.entries[19].id == "g0019");

    const mmg::VideoTensor v =
        mmg::load_video(dir / loaded.entries[0].modality_paths.at("rgb"));
    CHECK(v.frames == 6);
    CHECK(v.height == 8);
    CHECK(v.width == 8);
    CHECK(v.channels == 3);
    const mmg::SkeletonSequence s = mmg::load_skeleton(
        dir / loaded.entries[0].modality_paths.at("skeleton"), mmg::kRawKeypointCount);
    CHECK(s.frames.size() == 6);

    SECTION("two runs with the same seed write identical bytes") {
        testutil::TempDir other("synthdata2");
        mmg::write_synthetic_dataset(other.path(), p);
        for (const char* rel :
             {"manifest.jsonl", "videos/g0003.rvid", "skeletons/g0007.json"}) {
            CHECK(mmg::read_file_bytes(dir / rel) == mmg::read_file_bytes(other / rel));
        }
    }

    SECTION("parameter validation") {
        mmg::SyntheticDatasetParams bad = p;
        bad.classes = 1;
        CHECK_THROWS_AS(mmg::write_synthetic_dataset(dir.path(), bad), mmg::ValidationError);
        bad = p;
        bad.classes = 9;
        CHECK_THROWS_AS(mmg::write_synthetic_dataset(dir.path(), bad), mmg::ValidationError);
        bad = p;
        bad.samples = 3;
        CHECK_THROWS_AS(mmg::write_synthetic_dataset(dir.path(), bad), mmg::ValidationError);
        bad = p;
        bad.video_frames = 5;
        CHECK_THROWS_AS(mmg::write_synthetic_dataset(dir.path(), bad), mmg::ValidationError);
    }
}

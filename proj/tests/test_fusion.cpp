#include <cmath>
#include <string>
#include <unordered_map>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include <mmg/mmg.hpp>

namespace {

mmg::ProbabilityMatrix make_pm(std::size_t cls, std::vector<std::string> ids,
                               std::vector<double> probs) {
    mmg::ProbabilityMatrix p;
    p.class_count = cls;
    p.sample_ids = std::move(ids);
    p.probs = std::move(probs);
    return p;
}

// Three two-class modalities over one sample: certain-right, certain-wrong
// on the other class, undecided.
mmg::AlignedPredictions worked_trio() {
    return mmg::align({{"rgb", make_pm(2, {"s0"}, {1.0, 0.0})},
                       {"depth", make_pm(2, {"s0"}, {0.0, 1.0})},
                       {"flow", make_pm(2, {"s0"}, {0.5, 0.5})}});
}

mmg::AlignedPredictions random_aligned(std::size_t n, std::size_t cls, std::uint64_t seed) {
    mmg::SplitMix64 rng(seed);
    std::vector<std::pair<std::string, mmg::ProbabilityMatrix>> preds;
    for (const char* name : {"rgb", "depth", "flow"}) {
        mmg::ProbabilityMatrix p;
        p.class_count = cls;
        for (std::size_t i = 0; i < n; ++i) {
            p.sample_ids.push_back("s" + std::to_string(i));
            std::vector<double> row(cls);
            double sum = 0.0;
            for (double& v : row) {
                v = 0.05 + rng.next_double();
                sum += v;
            }
            for (double v : row) p.probs.push_back(v / sum);
        }
        preds.emplace_back(name, std::move(p));
    }
    return mmg::align(preds);
}

}  // namespace

TEST_CASE("fusion weights validate and normalize") {
    mmg::FusionWeights fw{{"a", "b", "c"}, {2.0, 3.0, 5.0}};
    const mmg::FusionWeights c = mmg::canonical(fw);
    CHECK(c.modality_names == fw.modality_names);
    CHECK(c.w == std::vector<double>{0.2, 0.3, 0.5});

    CHECK_THROWS_AS(mmg::validate_weights({{}, {}}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::validate_weights({{"a", "b"}, {1.0}}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::validate_weights({{"a"}, {-0.1}}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::validate_weights({{"a"}, {std::nan("")}}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::validate_weights({{"a", "b"}, {0.0, 0.0}}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::validate_weights({{"a", "a"}, {1.0, 1.0}}), mmg::ValidationError);
}

TEST_CASE("align keeps the shared ids in first-matrix order") {
    const auto p1 = make_pm(2, {"a", "b", "c"}, {0.9, 0.1, 0.8, 0.2, 0.7, 0.3});
    const auto p2 = make_pm(2, {"b", "c", "d"}, {0.6, 0.4, 0.5, 0.5, 0.4, 0.6});
    const mmg::AlignedPredictions a = mmg::align({{"one", p1}, {"two", p2}});
    CHECK(a.sample_ids == std::vector<std::string>{"b", "c"});
    CHECK(a.dropped_ids == std::vector<std::string>{"a", "d"});
    CHECK(a.modality_names == std::vector<std::string>{"one", "two"});
    CHECK(a.row(0, 0)[0] == 0.8);
    CHECK(a.row(1, 0)[0] == 0.6);
    CHECK(a.row(1, 1)[1] == 0.5);
    CHECK_FALSE(a.labels.has_value());

    SECTION("identical id sets keep everything") {
        const mmg::AlignedPredictions b = mmg::align({{"one", p1}, {"copy", p1}});
        CHECK(b.rows() == 3);
        CHECK(b.dropped_ids.empty());
        CHECK(b.probs[0] == b.probs[1]);
    }

    SECTION("labels join against the retained ids") {
        const std::unordered_map<std::string, std::size_t> labels{{"b", 1}, {"c", 0}};
        const mmg::AlignedPredictions b = mmg::align({{"one", p1}, {"two", p2}}, &labels);
        REQUIRE(b.labels.has_value());
        CHECK(*b.labels == std::vector<std::size_t>{1, 0});

        const std::unordered_map<std::string, std::size_t> partial{{"b", 1}};
        CHECK_THROWS_AS(mmg::align({{"one", p1}, {"two", p2}}, &partial),
                        mmg::ValidationError);
    }

    SECTION("malformed inputs are rejected") {
        CHECK_THROWS_AS(mmg::align({}), mmg::ValidationError);
        CHECK_THROWS_AS(mmg::align({{"one", p1}, {"one", p2}}), mmg::ValidationError);
        const auto p3 = make_pm(3, {"b"}, {0.2, 0.3, 0.5});
        CHECK_THROWS_AS(mmg::align({{"one", p1}, {"three", p3}}), mmg::ShapeError);
        const auto p4 = make_pm(2, {"x", "y"}, {0.5, 0.5, 0.5, 0.5});
        CHECK_THROWS_AS(mmg::align({{"one", p1}, {"four", p4}}), mmg::AlignmentError);
        auto dup = p1;
        dup.sample_ids[1] = "a";
        CHECK_THROWS_AS(mmg::align({{"one", dup}, {"two", p2}}), mmg::DuplicateSampleError);
    }
}

TEST_CASE("average fuse blends rows and passes single modalities through") {
    const mmg::AlignedPredictions a = mmg::align(
        {{"one", make_pm(2, {"s"}, {0.8, 0.2})}, {"two", make_pm(2, {"s"}, {0.4, 0.6})}});
    const mmg::ProbabilityMatrix avg = mmg::average_fuse(a, {"one", "two"});
    CHECK(std::fabs(avg.probs[0] - 0.6) <= 1e-15);
    CHECK(std::fabs(avg.probs[1] - 0.4) <= 1e-15);

    const mmg::ProbabilityMatrix solo = mmg::average_fuse(a, {"two"});
    CHECK(solo.probs == std::vector<double>{0.4, 0.6});
    CHECK(solo.sample_ids == a.sample_ids);

    const mmg::AlignedPredictions twin = mmg::align(
        {{"one", make_pm(2, {"s"}, {0.8, 0.2})}, {"two", make_pm(2, {"s"}, {0.8, 0.2})}});
    CHECK(mmg::average_fuse(twin, {"one", "two"}).probs == std::vector<double>{0.8, 0.2});

    CHECK_THROWS_AS(mmg::average_fuse(a, {}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::average_fuse(a, {"one", "one"}), mmg::ValidationError);
    CHECK_THROWS_AS(mmg::average_fuse(a, {"nope"}), mmg::KeyError);
}

TEST_CASE("weighted fuse reproduces the worked three-modality row") {
    const mmg::AlignedPredictions a = worked_trio();
    // weights keyed by name, deliberately out of modality order
    const mmg::FusionWeights fw{{"flow", "rgb", "depth"}, {0.2, 0.5, 0.3}};
    const mmg::ProbabilityMatrix fused = mmg::weighted_fuse(a, fw);
    CHECK(fused.probs[0] == 0.6);
    CHECK(fused.probs[1] == 0.4);

    SECTION("one-hot weights pass a single matrix through unchanged") {
        const mmg::FusionWeights hot{{"rgb", "depth", "flow"}, {0.0, 1.0, 0.0}};
        CHECK(mmg::weighted_fuse(a, hot).probs == a.probs[1]);
    }

    SECTION("weight sets must cover exactly the aligned modalities") {
        CHECK_THROWS_AS(mmg::weighted_fuse(a, {{"rgb", "depth"}, {0.5, 0.5}}), mmg::KeyError);
        CHECK_THROWS_AS(
            mmg::weighted_fuse(a, {{"rgb", "depth", "audio"}, {0.4, 0.3, 0.3}}),
            mmg::KeyError);
    }
}

TEST_CASE("uniform weights agree with the plain average") {
    const mmg::AlignedPredictions a = random_aligned(7, 4, 99);
    const std::vector<std::string> all{"rgb", "depth", "flow"};
    const mmg::ProbabilityMatrix avg = mmg::average_fuse(a, all);

    const mmg::ProbabilityMatrix ones = mmg::weighted_fuse(a, {all, {1.0, 1.0, 1.0}});
    CHECK(ones.probs == avg.probs);

    const mmg::ProbabilityMatrix fifths = mmg::weighted_fuse(a, {all, {0.2, 0.2, 0.2}});
    REQUIRE(fifths.probs.size() == avg.probs.size());
    for (std::size_t i = 0; i < avg.probs.size(); ++i)
        REQUIRE(std::fabs(fifths.probs[i] - avg.probs[i]) <= 1e-15);
}

TEST_CASE("weighted fuse is invariant to the weight scale") {
    const mmg::AlignedPredictions a = random_aligned(5, 3, 17);
    const std::vector<std::string> all{"rgb", "depth", "flow"};
    const mmg::ProbabilityMatrix base = mmg::weighted_fuse(a, {all, {0.5, 0.3, 0.2}});

    const mmg::ProbabilityMatrix doubled = mmg::weighted_fuse(a, {all, {1.0, 0.6, 0.4}});
    CHECK(doubled.probs == base.probs);

    const mmg::ProbabilityMatrix tripled = mmg::weighted_fuse(a, {all, {1.5, 0.9, 0.6}});
    for (std::size_t i = 0; i < base.probs.size(); ++i)
        REQUIRE(std::fabs(tripled.probs[i] - base.probs[i]) <= 1e-15);
}

TEST_CASE("fused rows stay distributions inside the convex hull") {
    const mmg::AlignedPredictions a = random_aligned(9, 5, 4242);
    const mmg::ProbabilityMatrix fused =
        mmg::weighted_fuse(a, {{"rgb", "depth", "flow"}, {0.37, 0.24, 0.39}});
    for (std::size_t i = 0; i < fused.rows(); ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < 5; ++j) {
            const double v = fused.row(i)[j];
            sum += v;
            double lo = 1.0, hi = 0.0;
            for (std::size_t m = 0; m < 3; ++m) {
                lo = std::min(lo, a.row(m, i)[j]);
                hi = std::max(hi, a.row(m, i)[j]);
            }
            REQUIRE(v >= lo - 1e-15);
            REQUIRE(v <= hi + 1e-15);
        }
        REQUIRE(std::fabs(sum - 1.0) <= 1e-12);
    }
    mmg::validate_probability_matrix(fused);
}

TEST_CASE("top-1 evaluation fills the confusion matrix by true class") {
    const auto p = make_pm(2, {"a", "b", "c"}, {0.9, 0.1, 0.8, 0.2, 0.1, 0.9});
    const mmg::EvalReport r = mmg::evaluate_top1(p, {0, 1, 1});
    CHECK(r.top1 == Catch::Approx(2.0 / 3.0));
    CHECK(r.n == 3);
    CHECK(r.class_count == 2);
    CHECK(r.confusion == std::vector<std::size_t>{1, 0, 1, 1});
    CHECK(r.per_class == std::vector<double>{1.0, 0.5});

    SECTION("argmax ties go to the smallest class index") {
        const auto tie = make_pm(4, {"a"}, {0.25, 0.25, 0.25, 0.25});
        CHECK(mmg::evaluate_top1(tie, {0}).top1 == 1.0);
        CHECK(mmg::evaluate_top1(tie, {1}).top1 == 0.0);
    }

    SECTION("shape and label errors") {
        CHECK_THROWS_AS(mmg::evaluate_top1(p, {0, 1}), mmg::ShapeError);
        CHECK_THROWS_AS(mmg::evaluate_top1(mmg::ProbabilityMatrix{}, {}), mmg::ShapeError);
        CHECK_THROWS_AS(mmg::evaluate_top1(p, {0, 1, 2}), mmg::LabelRangeError);
    }
}

TEST_CASE("weight search finds a dominant modality") {
    // "truth" is always right, "adv" always wrong: only w_truth > w_adv wins
    mmg::ProbabilityMatrix truth, adv;
    truth.class_count = adv.class_count = 2;
    for (std::size_t i = 0; i < 10; ++i) {
        const std::string id = "s" + std::to_string(i);
        truth.sample_ids.push_back(id);
        adv.sample_ids.push_back(id);
        const std::size_t y = i % 2;
        truth.probs.push_back(y == 0 ? 1.0 : 0.0);
        truth.probs.push_back(y == 0 ? 0.0 : 1.0);
        adv.probs.push_back(y == 0 ? 0.0 : 1.0);
        adv.probs.push_back(y == 0 ? 1.0 : 0.0);
    }
    std::unordered_map<std::string, std::size_t> labels;
    for (std::size_t i = 0; i < 10; ++i) labels["s" + std::to_string(i)] = i % 2;

    const mmg::AlignedPredictions a = mmg::align({{"truth", truth}, {"adv", adv}}, &labels);
    auto [w, report] = mmg::search_weights(a, {});
    CHECK(report.top1 == 1.0);
    CHECK(w.modality_names == std::vector<std::string>{"adv", "truth"});
    CHECK(w.w == std::vector<double>{0.0, 1.0});
}

TEST_CASE("weight search tie-break is the lexicographically smallest point") {
    const auto p = make_pm(3, {"a", "b"}, {0.7, 0.2, 0.1, 0.1, 0.7, 0.2});
    std::unordered_map<std::string, std::size_t> labels{{"a", 0}, {"b", 1}};
    // identical matrices: every grid point scores the same
    const mmg::AlignedPredictions a = mmg::align({{"late", p}, {"early", p}}, &labels);
    auto [w, report] = mmg::search_weights(a, {});
    CHECK(report.top1 == 1.0);
    CHECK(w.modality_names == std::vector<std::string>{"early", "late"});
    CHECK(w.w == std::vector<double>{0.0, 1.0});
}

TEST_CASE("weight search ignores matrix input order") {
    const mmg::SyntheticSpec spec{
        200, 5, {0.7, 0.62}, {1.0, 0.0, 0.0, 1.0}, {"alpha", "beta"}, 31};
    const mmg::AlignedPredictions a = mmg::gen_predictions(spec);

    std::unordered_map<std::string, std::size_t> labels;
    for (std::size_t i = 0; i < a.rows(); ++i) labels[a.sample_ids[i]] = (*a.labels)[i];
    auto alpha = make_pm(5, a.sample_ids, a.probs[0]);
    auto beta = make_pm(5, a.sample_ids, a.probs[1]);

    auto [w1, r1] = mmg::search_weights(mmg::align({{"alpha", alpha}, {"beta", beta}}, &labels), {});
    auto [w2, r2] = mmg::search_weights(mmg::align({{"beta", beta}, {"alpha", alpha}}, &labels), {});
    CHECK(w1.modality_names == w2.modality_names);
    CHECK(w1.w == w2.w);
    CHECK(r1.top1 == r2.top1);
}

TEST_CASE("search budget and configuration are enforced") {
    const mmg::SyntheticSpec spec{
        50, 4, {0.8, 0.7, 0.6}, {1, 0, 0, 0, 1, 0, 0, 0, 1}, {}, 5};
    const mmg::AlignedPredictions a = mmg::gen_predictions(spec);

    mmg::SearchConfig tight;
    tight.max_grid_points = 100;  // the 0.05 grid over 3 modalities has 231 points
    CHECK_THROWS_WITH(mmg::search_weights(a, tight),
                      Catch::Matchers::ContainsSubstring("231") &&
                          Catch::Matchers::ContainsSubstring("refine"));

    mmg::SearchConfig bad;
    bad.mode = "random";
    CHECK_THROWS_AS(mmg::search_weights(a, bad), mmg::ValidationError);

    mmg::AlignedPredictions unlabeled = a;
    unlabeled.labels.reset();
    CHECK_THROWS_AS(mmg::search_weights(unlabeled, {}), mmg::ValidationError);

    mmg::AlignedPredictions solo;
    solo.class_count = 4;
    solo.modality_names = {"only"};
    solo.sample_ids = a.sample_ids;
    solo.probs = {a.probs[0]};
    solo.labels = a.labels;
    CHECK_THROWS_AS(mmg::search_weights(solo, {}), mmg::ValidationError);
}

TEST_CASE("refine search lands near the exhaustive optimum") {
    mmg::SyntheticSpec spec;
    spec.samples = 400;
    spec.classes = 6;
    spec.accuracy = {0.72, 0.66, 0.6};
    spec.overlap = {1, 0, 0, 0, 1, 0, 0, 0, 1};
    spec.seed = 9;
    const mmg::AlignedPredictions a = mmg::gen_predictions(spec);

    auto [we, re] = mmg::search_weights(a, {});
    mmg::SearchConfig refine;
    refine.mode = "refine";
    auto [wr, rr] = mmg::search_weights(a, refine);

    CHECK(rr.top1 >= re.top1 - 0.005);
    double sum = 0.0;
    for (double v : wr.w) sum += v;
    CHECK(std::fabs(sum - 1.0) <= 1e-12);
    // the refined report is consistent with applying the weights directly
    const mmg::EvalReport direct =
        mmg::evaluate_top1(mmg::weighted_fuse(a, wr), *a.labels);
    CHECK(direct.top1 == rr.top1);
}

TEST_CASE("simplex grid counts match the closed form") {
    CHECK(mmg::simplex_grid_count(20, 3) == 231);
    CHECK(mmg::simplex_grid_count(20, 2) == 21);
    CHECK(mmg::simplex_grid_count(20, 1) == 1);
    CHECK(mmg::simplex_grid_count(0, 3) == 1);
    CHECK(mmg::simplex_grid_count(10, 3) == 66);
    CHECK(mmg::simplex_grid_count(50, 4) == 23426);
}

#include "dforge/errors.hpp"
#include "dforge/loss.hpp"

#include "fixtures.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>

using namespace dforge;

namespace {

class ConstantPerceptual : public PerceptualTerm {
public:
    explicit ConstantPerceptual(double value) : value_(value) {}
    double evaluate(const ImageBuffer&, const ImageBuffer&, const ConfidenceMap*) const override {
        return value_;
    }

private:
    double value_;
};

ImageBuffer constant_image(int h, int w, double value) {
    return ImageBuffer(h, w, value);
}

} // namespace

TEST_CASE("l1: identity, constant offset, conf-weighted oracle") {
    CounterRng rng(1);
    const ImageBuffer a = fixtures::random_image(12, 9, rng);
    CHECK(l1_loss(a, a) == 0.0);

    ImageBuffer b = a;
    for (double& v : b.pixels) {
        v = std::min(1.0, v * 0.5 + 0.1);
    }
    ImageBuffer offset = constant_image(6, 6, 0.4);
    const ImageBuffer base = constant_image(6, 6, 0.3);
    CHECK(l1_loss(offset, base) == doctest::Approx(0.1).epsilon(1e-12));

    const ConfidenceMap conf = fixtures::random_confidence(12, 9, rng);
    CHECK(l1_loss(a, b, &conf) ==
          doctest::Approx(oracle::l1_pixel_loop(a, b, &conf)).epsilon(1e-12));

    const ImageBuffer wrong(4, 4);
    CHECK_THROWS_AS(l1_loss(a, wrong), ShapeMismatch);
}

TEST_CASE("l1 symmetry and confidence scaling") {
    CounterRng rng(2);
    const ImageBuffer a = fixtures::random_image(8, 8, rng);
    const ImageBuffer b = fixtures::random_image(8, 8, rng);
    CHECK(l1_loss(a, b) > 0.0);
    CHECK(tv_loss(a) > 0.0);
    CHECK(l1_loss(a, b) == doctest::Approx(l1_loss(b, a)).epsilon(1e-15));

    const ConfidenceMap twice = fixtures::constant_confidence(8, 8, 2.0);
    CHECK(l1_loss(a, b, &twice) == doctest::Approx(2.0 * l1_loss(a, b)).epsilon(1e-12));

    const ConfidenceMap zero = fixtures::constant_confidence(8, 8, 0.0);
    CHECK(l1_loss(a, b, &zero) == 0.0);
}

TEST_CASE("ssim: identity and brute-force sliding window oracle") {
    CounterRng rng(3);
    const ImageBuffer a = fixtures::random_image(16, 16, rng);
    CHECK(ssim_loss(a, a) == doctest::Approx(0.0).epsilon(1e-12));

    const ImageBuffer b = fixtures::random_image(16, 16, rng);
    CHECK(ssim_loss(a, b) ==
          doctest::Approx(oracle::ssim_loss_brute(a, b, 11, 1.5, nullptr)).epsilon(1e-9));

    const ConfidenceMap conf = fixtures::random_confidence(16, 16, rng);
    CHECK(ssim_loss(a, b, 11, 1.5, &conf) ==
          doctest::Approx(oracle::ssim_loss_brute(a, b, 11, 1.5, &conf)).epsilon(1e-9));

    CHECK(ssim_loss(a, b) == doctest::Approx(ssim_loss(b, a)).epsilon(1e-12));

    const ImageBuffer tiny(4, 4);
    CHECK_THROWS_AS(ssim_loss(tiny, tiny), ImageTooSmall);
}

TEST_CASE("ssim of inverted high-contrast patterns exceeds 1") {
    ImageBuffer checker(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            const double v = ((x + y) % 2 == 0) ? 1.0 : 0.0;
            for (int c = 0; c < 3; ++c) {
                checker.at(y, x, c) = v;
            }
        }
    }
    ImageBuffer inverted = checker;
    for (double& v : inverted.pixels) {
        v = 1.0 - v;
    }
    const double loss = ssim_loss(checker, inverted);
    CHECK(loss > 1.0);
    CHECK(loss ==
          doctest::Approx(oracle::ssim_loss_brute(checker, inverted, 11, 1.5, nullptr))
              .epsilon(1e-9));
}

TEST_CASE("ssim of constant images matches the closed-form luminance term") {
    const double a = 0.25, b = 0.75;
    const ImageBuffer img_a = constant_image(16, 16, a);
    const ImageBuffer img_b = constant_image(16, 16, b);
    const double c1 = 0.01 * 0.01;
    const double expected = 1.0 - (2 * a * b + c1) / (a * a + b * b + c1);
    CHECK(ssim_loss(img_a, img_b) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("tv: constant, single edge, random oracle") {
    CHECK(tv_loss(constant_image(8, 8, 0.37)) == 0.0);

    // Vertical step edge of height 1 between columns 3 and 4.
    ImageBuffer edge(4, 8, 0.0);
    for (int y = 0; y < 4; ++y) {
        for (int x = 4; x < 8; ++x) {
            for (int c = 0; c < 3; ++c) {
                edge.at(y, x, c) = 1.0;
            }
        }
    }
    // Hand count: 4 rows x 3 channels x one |dx| = 1 step; mean over H*W*C.
    const double expected = (4.0 * 3.0) / (4.0 * 8.0 * 3.0);
    CHECK(tv_loss(edge) == doctest::Approx(expected).epsilon(1e-12));

    CounterRng rng(4);
    const ImageBuffer img = fixtures::random_image(9, 7, rng);
    CHECK(tv_loss(img) == doctest::Approx(oracle::tv_pixel_loop(img)).epsilon(1e-12));

    CHECK_THROWS_AS(tv_loss(constant_image(1, 5, 0.0)), ImageTooSmall);
}

TEST_CASE("confidence-weighted loss reduces exactly at conf = 1") {
    CounterRng rng(5);
    const ImageBuffer pred = fixtures::random_image(16, 16, rng);
    const ImageBuffer gt = fixtures::random_image(16, 16, rng);
    const ConfidenceMap ones = fixtures::constant_confidence(16, 16, 1.0);
    const LossWeights weights = LossWeights::confidence_defaults();

    const LossBreakdown breakdown = confidence_weighted_loss(pred, gt, ones, weights);
    CHECK(breakdown.per_term.at("l1") == doctest::Approx(l1_loss(pred, gt)).epsilon(1e-15));
    CHECK(breakdown.per_term.at("ssim") == doctest::Approx(ssim_loss(pred, gt)).epsilon(1e-15));
    CHECK(breakdown.per_term.at("lpips") == 0.0);
    CHECK(breakdown.total ==
          doctest::Approx(0.8 * l1_loss(pred, gt) + 0.2 * ssim_loss(pred, gt)).epsilon(1e-12));
}

TEST_CASE("zero confidence annihilates the loss") {
    CounterRng rng(6);
    const ImageBuffer pred = fixtures::random_image(16, 16, rng);
    const ImageBuffer gt = fixtures::random_image(16, 16, rng);
    const ConfidenceMap zeros = fixtures::constant_confidence(16, 16, 0.0);
    const LossBreakdown breakdown =
        confidence_weighted_loss(pred, gt, zeros, LossWeights::confidence_defaults());
    CHECK(breakdown.total == 0.0);
}

TEST_CASE("default weights with a mock perceptual term match hand computation") {
    CounterRng rng(7);
    const ImageBuffer pred = fixtures::random_image(16, 16, rng);
    const ImageBuffer gt = fixtures::random_image(16, 16, rng);
    const ConfidenceMap conf = fixtures::random_confidence(16, 16, rng);
    const ConstantPerceptual perceptual(1.0);
    const LossWeights weights = LossWeights::confidence_defaults();

    const LossBreakdown breakdown = confidence_weighted_loss(pred, gt, conf, weights, &perceptual);
    const double expected = 0.8 * l1_loss(pred, gt, &conf) + 0.2 * ssim_loss(pred, gt, 11, 1.5, &conf) +
                            0.3 * 1.0;
    CHECK(breakdown.total == doctest::Approx(expected).epsilon(1e-12));
    CHECK(breakdown.per_term.at("lpips") == 1.0);

    // Breakdown consistency.
    const double reassembled = weights.l1 * breakdown.per_term.at("l1") +
                               weights.ssim * breakdown.per_term.at("ssim") +
                               weights.lpips * breakdown.per_term.at("lpips");
    CHECK(breakdown.total == doctest::Approx(reassembled).epsilon(1e-12));
}

TEST_CASE("dynamic scene loss vanishes for identical images") {
    CounterRng rng(8);
    const ImageBuffer img = fixtures::random_image(16, 16, rng);
    const LossBreakdown breakdown = dynamic_scene_loss(img, img, LossWeights::dynamic_defaults());
    CHECK(breakdown.total == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("dynamic scene loss on a constant offset isolates the l1 term") {
    // Build a textured image so tv(pred) alone would not vanish.
    ImageBuffer gt(16, 16);
    for (int y = 0; y < 16; ++y) {
        for (int x = 0; x < 16; ++x) {
            for (int c = 0; c < 3; ++c) {
                gt.at(y, x, c) = 0.05 + 0.4 * ((x + 2 * y + c) % 5) / 5.0;
            }
        }
    }
    ImageBuffer pred = gt;
    for (double& v : pred.pixels) {
        v += 0.1;
    }

    const LossBreakdown breakdown = dynamic_scene_loss(pred, gt, LossWeights::dynamic_defaults());
    CHECK(breakdown.per_term.at("l1") == doctest::Approx(0.1).epsilon(1e-12));
    CHECK(breakdown.per_term.at("tv") == doctest::Approx(0.0).epsilon(1e-12));

    CHECK(breakdown.per_term.at("ssim") == doctest::Approx(ssim_loss(pred, gt)).epsilon(1e-15));
}

TEST_CASE("dynamic scene loss terms equal individually invoked kernels") {
    CounterRng rng(9);
    const ImageBuffer pred = fixtures::random_image(16, 16, rng);
    const ImageBuffer gt = fixtures::random_image(16, 16, rng);
    const LossWeights weights = LossWeights::dynamic_defaults();
    const LossBreakdown breakdown = dynamic_scene_loss(pred, gt, weights);

    CHECK(breakdown.per_term.at("l1") == l1_loss(pred, gt));
    CHECK(breakdown.per_term.at("ssim") == ssim_loss(pred, gt));
    CHECK(breakdown.per_term.at("tv") == tv_of_difference(pred, gt));
    CHECK(breakdown.total == doctest::Approx(breakdown.per_term.at("l1") +
                                             breakdown.per_term.at("ssim") +
                                             breakdown.per_term.at("tv"))
                                 .epsilon(1e-12));
}

TEST_CASE("finite-difference perturbation matches the analytic derivative") {
    CounterRng rng(10);
    ImageBuffer pred = fixtures::random_image(8, 8, rng);
    const ImageBuffer gt = fixtures::random_image(8, 8, rng);

    // Make sure the perturbed pixel starts strictly above its target so the
    // l1 kernel is locally linear.
    const int py = 3, px = 4, pc = 1;
    pred.at(py, px, pc) = std::min(0.9, gt.at(py, px, pc) + 0.2);

    const double h = 1e-5;
    const double base_l1 = l1_loss(pred, gt);
    const double base_tv = tv_loss(pred);

    ImageBuffer bumped = pred;
    bumped.at(py, px, pc) += h;

    // Analytic l1 derivative: sign/(H*W*C).
    const double dl1 = (l1_loss(bumped, gt) - base_l1) / h;
    CHECK(std::abs(dl1 - 1.0 / (8 * 8 * 3)) < 1e-6);

    // Analytic tv derivative: sum of sign changes on the 4 incident
    // differences, over H*W*C.
    double expected_dtv = 0.0;
    const auto sgn = [](double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); };
    expected_dtv += sgn(pred.at(py, px, pc) - pred.at(py, px - 1, pc));
    expected_dtv -= sgn(pred.at(py, px + 1, pc) - pred.at(py, px, pc));
    expected_dtv += sgn(pred.at(py, px, pc) - pred.at(py - 1, px, pc));
    expected_dtv -= sgn(pred.at(py + 1, px, pc) - pred.at(py, px, pc));
    expected_dtv /= 8 * 8 * 3;
    const double dtv = (tv_loss(bumped) - base_tv) / h;
    CHECK(std::abs(dtv - expected_dtv) < 1e-6);
}

TEST_CASE("image range policies") {
    ImageBuffer img(4, 4, 0.5);
    img.pixels[0] = 1.4;
    ImageBuffer clamped = img;
    clamped.enforce_range(RangePolicy::kClamp);
    CHECK(clamped.pixels[0] == 1.0);
    CHECK_THROWS_AS(img.enforce_range(RangePolicy::kReject), ShapeMismatch);
}

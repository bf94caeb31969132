#include <filesystem>
#include <random>

#include "doctest.h"
#include "flowpull/media_io.hpp"
#include "flowpull/propagation.hpp"
#include "flowpull/reference.hpp"
#include "flowpull/synthbench.hpp"
#include "oracles.hpp"
#include "support.hpp"

using namespace flowpull;
using namespace oracles;

namespace {

PropagationState state_with_masks(std::vector<Mask> masks, std::uint64_t seed = 1) {
  PropagationState s;
  for (std::size_t i = 0; i < masks.size(); ++i) {
    Image img = testing::random_image(masks[i].width(), masks[i].height(), seed + i);
    for (std::size_t p = 0; p < img.pixel_count(); ++p)
      if (masks[i].data()[p]) std::fill_n(img.pixel(p), 3, 0.0f);
    s.images.push_back(std::move(img));
    s.invalid.emplace_back(masks[i].width(), masks[i].height(), 0);
  }
  s.masks = std::move(masks);
  return s;
}

FlowSet zero_flows(int w, int h, int length) {
  FlowSet f;
  f.forward.assign(length - 1, FlowField(w, h));
  f.backward.assign(length - 1, FlowField(w, h));
  return f;
}

class CountingProvider final : public ReferenceProvider {
 public:
  explicit CountingProvider(float value) : value_(value) {}
  std::optional<Image> reference_for(int key, const PropagationState& s) override {
    keys.push_back(key);
    return Image(s.images[key].width(), s.images[key].height(), value_);
  }
  std::vector<int> keys;

 private:
  float value_;
};

class FailingProvider final : public ReferenceProvider {
 public:
  std::optional<Image> reference_for(int, const PropagationState&) override {
    throw Error("generator offline");
  }
};

}  // namespace

TEST_SUITE("reference") {
  TEST_CASE("no residual holes gives zero counts and no key frame") {
    const auto s = state_with_masks({Mask(8, 8, 0), Mask(8, 8, 0), Mask(8, 8, 0)});
    const auto flows = zero_flows(8, 8, 3);
    for (double c : connection_counts(s, flows)) CHECK(c == 0.0);
    CHECK_FALSE(select_key_frame(s, flows).has_value());
  }

  TEST_CASE("identical holes under zero flow give L * A") {
    const Mask hole = testing::disc_mask(12, 10, 5, 5, 3);
    const auto s = state_with_masks(std::vector<Mask>(4, hole));
    const auto flows = zero_flows(12, 10, 4);
    for (int i = 0; i < 4; ++i) CHECK(connection_count(s, flows, i) == 4.0 * count_set(hole));
  }

  TEST_CASE("connection count matches the direct double sum") {
    for (std::uint64_t seed = 1; seed <= 6; ++seed) {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> u(0.0, 1.0);
      std::vector<Mask> masks;
      for (int i = 0; i < 3; ++i)
        masks.push_back(testing::disc_mask(24, 20, 6 + 12 * u(rng), 5 + 10 * u(rng), 2 + 5 * u(rng)));
      const auto s = state_with_masks(masks, seed);
      const FlowSet flows = random_smooth_flows(24, 20, 3, seed, 2.0);
      for (int i = 0; i < 3; ++i) {
        const double oracle = connection_oracle(s, flows, i);
        const double got = connection_count(s, flows, i);
        CHECK(std::abs(got - oracle) <= 1e-6 * std::max(1.0, oracle));
        CHECK(got >= count_set(masks[i]));
      }
    }
  }

  TEST_CASE("ties choose the lowest index") {
    const std::vector<double> tied{3.0, 5.0, 5.0, 1.0};
    CHECK(argmax_lowest(tied) == 1);
    const std::vector<double> equal{2.0, 2.0, 2.0};
    CHECK(argmax_lowest(equal) == 0);
    CHECK_FALSE(argmax_lowest(std::span<const double>{}).has_value());
    const Mask hole = testing::rect_mask(8, 8, 2, 2, 4, 4);
    const auto s = state_with_masks(std::vector<Mask>(3, hole));
    CHECK(select_key_frame(s, zero_flows(8, 8, 3)) == 0);
  }

  TEST_CASE("single holed frame is selected") {
    std::vector<Mask> masks(5, Mask(10, 10, 0));
    masks[3] = testing::disc_mask(10, 10, 4, 4, 2);
    const auto s = state_with_masks(masks);
    const auto flows = zero_flows(10, 10, 5);
    for (int i = 0; i < 5; ++i) CHECK((connection_oracle(s, flows, i) > 0) == (i == 3));
    CHECK(select_key_frame(s, flows) == 3);
  }

  TEST_CASE("self-term makes C_i at least the own residual area") {
    std::vector<Mask> masks{testing::rect_mask(10, 10, 0, 0, 3, 3),
                            testing::rect_mask(10, 10, 6, 6, 10, 10)};
    const auto s = state_with_masks(masks);
    const auto flows = zero_flows(10, 10, 2);
    CHECK(connection_count(s, flows, 0) == 9.0);
    CHECK(connection_count(s, flows, 1) == 16.0);
    CHECK(select_key_frame(s, flows) == 1);
  }

  TEST_CASE("ingest_reference composes reference into the residual hole") {
    auto s = state_with_masks({Mask(6, 4, 0), Mask(6, 4, 0)});
    const auto before = s;
    const Image ref(6, 4, 0.75f);
    Mask marked = ingest_reference(s, 1, ref);
    CHECK(count_set(marked) == 0);
    CHECK(s.images == before.images);

    s.masks[1] = Mask(6, 4, 1);
    marked = ingest_reference(s, 1, ref);
    CHECK(count_set(marked) == 24);
    CHECK(s.images[1] == ref);
    CHECK(count_set(s.masks[1]) == 0);

    s = before;
    s.masks[0] = testing::rect_mask(6, 4, 0, 0, 3, 4);
    ingest_reference(s, 0, ref);
    for (int y = 0; y < 4; ++y)
      for (int x = 0; x < 6; ++x)
        for (int c = 0; c < 3; ++c)
          CHECK(s.images[0](x, y, c) == (x < 3 ? 0.75f : before.images[0](x, y, c)));
    CHECK_THROWS_AS(ingest_reference(s, 0, Image(5, 4, 0.0f)), Error);
  }

  TEST_CASE("zero flow reference propagation copies the key colors") {
    const Mask hole = testing::disc_mask(12, 12, 6, 6, 3);
    auto s = state_with_masks({hole, hole, Mask(12, 12, 0), hole});
    const Image ref = testing::random_image(12, 12, 77);
    ingest_reference(s, 1, ref);
    const auto out = propagate_reference(s, zero_flows(12, 12, 4), 1);
    for (int i : {0, 3}) {
      CHECK(count_set(out.masks[i]) == 0);
      CHECK(out.filled[i] == hole);
      for (std::size_t p = 0; p < hole.pixel_count(); ++p)
        for (int c = 0; c < 3; ++c)
          CHECK(out.images[i].pixel(p)[c] ==
                (hole.data()[p] ? ref.pixel(p)[c] : s.images[i].pixel(p)[c]));
    }
    CHECK(out.images[2] == s.images[2]);
    CHECK(count_set(out.filled[2]) == 0);
  }

  TEST_CASE("translating scene: reference appears at the analytic displacement") {
    const int w = 40, h = 30;
    FlowSet flows;
    for (int i = 0; i < 3; ++i) {
      flows.forward.push_back(FlowField::constant(w, h, 1.25f, -0.5f));
      flows.backward.push_back(FlowField::constant(w, h, -1.25f, 0.5f));
    }
    std::vector<Mask> masks(4, testing::rect_mask(w, h, 12, 10, 24, 20));
    auto s = state_with_masks(masks);
    Image ref(w, h);
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        ref(x, y, 0) = x / 64.0f;
        ref(x, y, 1) = y / 64.0f;
        ref(x, y, 2) = 0.5f;
      }
    s.images[3] = ref;  // known pixels of the key frame show the same ramp
    for (std::size_t p = 0; p < masks[3].pixel_count(); ++p)
      if (masks[3].data()[p]) std::fill_n(s.images[3].pixel(p), 3, 0.0f);
    ingest_reference(s, 3, ref);
    const auto out = propagate_reference(s, flows, 3);
    for (int i = 0; i < 3; ++i) {
      const double sx = 1.25 * (3 - i), sy = -0.5 * (3 - i);
      for (int y = 10; y < 20; ++y)
        for (int x = 12; x < 24; ++x) {
          REQUIRE(out.filled[i](x, y));
          CHECK(std::abs(out.images[i](x, y, 0) * 64.0 - (x + sx)) < 1e-3);
          CHECK(std::abs(out.images[i](x, y, 1) * 64.0 - (y + sy)) < 1e-3);
        }
    }
  }

  TEST_CASE("key-frame pixels flagged unreliable are never pulled") {
    const Mask hole = testing::rect_mask(8, 8, 2, 2, 6, 6);
    auto s = state_with_masks({hole, Mask(8, 8, 0)});
    s.invalid[1] = testing::rect_mask(8, 8, 3, 3, 4, 4);
    const auto out = propagate_reference(s, zero_flows(8, 8, 2), 1);
    CHECK(out.masks[0](3, 3) == 1);
    CHECK(count_set(out.masks[0]) == 1);
  }

  TEST_CASE("multi-key loop: one round, zero rounds, two segments") {
    const Mask hole = testing::disc_mask(10, 10, 5, 5, 2);
    CountingProvider p1(0.5f);
    auto s = state_with_masks(std::vector<Mask>(4, hole));
    auto r = multi_key_loop(s, zero_flows(10, 10, 4), p1, 3);
    CHECK(r.rounds.size() == 1);
    CHECK(r.status == KeyLoopStatus::kComplete);
    CHECK(p1.keys == std::vector<int>{0});
    for (const Mask& m : r.state.masks) CHECK(count_set(m) == 0);
    for (const Mask& m : r.reference_sourced) CHECK(m == hole);

    CountingProvider p0(0.5f);
    auto clean = state_with_masks(std::vector<Mask>(3, Mask(10, 10, 0)));
    r = multi_key_loop(clean, zero_flows(10, 10, 3), p0, 3);
    CHECK(r.rounds.empty());
    CHECK(p0.keys.empty());
    CHECK(r.state.images == clean.images);

    // Frames 0-2 and 3-5 with all-invalid flows between 2 and 3.
    FlowSet flows = zero_flows(10, 10, 6);
    flows.forward[2].valid.fill(0);
    flows.backward[2].valid.fill(0);
    std::vector<Mask> masks(6, hole);
    masks[4] = testing::disc_mask(10, 10, 5, 5, 3);  // the later segment wins on area
    CountingProvider p2(0.25f);
    r = multi_key_loop(state_with_masks(masks), flows, p2, 3);
    CHECK(r.rounds.size() == 2);
    CHECK(r.status == KeyLoopStatus::kComplete);
    REQUIRE(p2.keys.size() == 2);
    CHECK(p2.keys[0] >= 3);
    CHECK(p2.keys[1] <= 2);
    CHECK(r.rounds[0].residual > r.rounds[1].residual);
    CHECK(r.rounds[1].residual == 0);
  }

  TEST_CASE("round limit stops the loop with residual holes left") {
    FlowSet flows = zero_flows(8, 8, 3);
    for (auto* set : {&flows.forward, &flows.backward})
      for (FlowField& f : *set) f.valid.fill(0);
    const Mask hole = testing::rect_mask(8, 8, 1, 1, 3, 3);
    CountingProvider p(0.5f);
    const auto r = multi_key_loop(state_with_masks(std::vector<Mask>(3, hole)), flows, p, 2);
    CHECK(r.rounds.size() == 2);
    CHECK(r.status == KeyLoopStatus::kRoundLimit);
    std::size_t prev = 12;
    for (const KeyRound& k : r.rounds) {
      CHECK(k.residual < prev);
      prev = k.residual;
    }
    CHECK_THROWS_AS(multi_key_loop(state_with_masks({hole}), zero_flows(8, 8, 2), p, 0), Error);
  }

  TEST_CASE("provider failure aborts the round and keeps the state") {
    const Mask hole = testing::rect_mask(8, 8, 1, 1, 3, 3);
    const auto s = state_with_masks(std::vector<Mask>(2, hole));
    FailingProvider failing;
    auto r = multi_key_loop(s, zero_flows(8, 8, 2), failing);
    CHECK(r.status == KeyLoopStatus::kProviderFailed);
    CHECK(r.failed_key == 0);
    CHECK(r.state.masks == s.masks);

    testing::TempDir dir("ref");
    FileReferenceProvider files(dir.path(), {"00000", "00001"});
    r = multi_key_loop(s, zero_flows(8, 8, 2), files);
    CHECK(r.status == KeyLoopStatus::kProviderFailed);
    CHECK(files.path_for(0) == dir.path() / "00000.png");

    write_frame(Image(8, 8, 1.0f), dir.path() / "00000.png");
    r = multi_key_loop(s, zero_flows(8, 8, 2), files);
    CHECK(r.status == KeyLoopStatus::kComplete);
    CHECK(r.state.images[1](2, 2, 0) == 1.0f);
  }

  TEST_CASE("fallback provider completes the key frame on its own") {
    const Mask hole = testing::rect_mask(8, 8, 2, 2, 5, 5);
    auto s = state_with_masks(std::vector<Mask>(2, hole));
    for (Image& img : s.images) img = Image(8, 8, 0.4f);
    for (std::size_t p = 0; p < hole.pixel_count(); ++p)
      if (hole.data()[p]) std::fill_n(s.images[0].pixel(p), 3, 0.0f);
    const HarmonicCompleter harmonic;
    FallbackReferenceProvider fallback(harmonic);
    const auto ref = fallback.reference_for(0, s);
    REQUIRE(ref);
    CHECK(std::abs((*ref)(3, 3, 1) - 0.4f) < 1e-5);
  }
}

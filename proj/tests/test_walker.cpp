#include <doctest.h>

#include <array>
#include <cmath>
#include <set>

#include "latgrow/interactions.hpp"
#include "latgrow/walker.hpp"

using namespace latgrow;

namespace {

// Scripted 1-d fixture for the stopping-time bookkeeping: position follows a
// fixed path, the live boundary is {3} before time 4 and {4} afterwards.
class ScriptedBoundaryModel : public WalkModel {
 public:
  explicit ScriptedBoundaryModel(std::vector<int> path) : path_(std::move(path)) {
    pos_ = Site(path_[0]);
  }
  int dim() const override { return 1; }
  void advance(RngBundle&) override { pos_ = Site(path_[static_cast<size_t>(++t_)]); }
  const Site& position() const override { return pos_; }
  bool on_live_boundary(const Site& z) const override { return z[0] == live(); }
  BoundaryPredicate freeze_boundary() const override {
    int b = live();
    return [b](const Site& z) { return z[0] == b; };
  }
  long snapshot_tag() const override { return live(); }

 private:
  int live() const { return t_ < 4 ? 3 : 4; }
  std::vector<int> path_;
  long t_ = 0;
  Site pos_;
};

}  // namespace

TEST_CASE("degree-one site forces the step") {
  GrowingDomain dom(2);
  dom.add_edges(std::vector<Edge>{Edge(Site(0, 0), 0)}, 0);  // 0 -- e1 only
  ObtModel model(std::move(dom), ObtParams{ObtKind::None}, 2);
  RngBundle rng = RngBundle::derive(1, 0);
  model.advance(rng);
  CHECK(model.position() == Site(1, 0));
}

TEST_CASE("plain SRW increments are uniform over the 2d directions") {
  PlainSrwModel model(2);
  RngBundle rng = RngBundle::derive(99, 0);
  std::array<long, 4> counts{};
  Site prev = model.position();
  long n = 1'000'000;
  for (long i = 0; i < n; ++i) {
    model.advance(rng);
    Site cur = model.position();
    for (int dir = 0; dir < 4; ++dir)
      if (cur == neighbor(prev, dir)) ++counts[static_cast<size_t>(dir)];
    prev = cur;
  }
  for (int dir = 0; dir < 4; ++dir) {
    double freq = static_cast<double>(counts[static_cast<size_t>(dir)]) / n;
    CHECK(std::abs(freq - 0.25) < 0.01);
  }
}

TEST_CASE("walk never crosses a closed edge") {
  // A plus-shaped path graph: each site has at most 2 open edges.
  GrowingDomain dom(2);
  std::vector<Edge> edges;
  for (int x = -3; x < 3; ++x) edges.emplace_back(Site(x, 0), 0);
  dom.add_edges(edges, 0);
  GrowingDomain copy = dom;  // ObtKind::None never mutates, but keep an oracle

  ObtModel model(std::move(dom), ObtParams{ObtKind::None}, 2);
  RngBundle rng = RngBundle::derive(7, 0);
  Site prev = model.position();
  for (int i = 0; i < 2000; ++i) {
    model.advance(rng);
    Site cur = model.position();
    CHECK(copy.edge_open(Edge::between(prev, cur, 2)));
    CHECK(cur[1] == 0);  // the line has no vertical edges
    prev = cur;
  }
}

TEST_CASE("horizon zero yields an empty run") {
  PlainSrwModel model(2);
  RngBundle rng = RngBundle::derive(0, 0);
  RunOptions opts;
  opts.horizon = 0;
  opts.record_trajectory = true;
  RunResult res = run(model, opts, rng);
  CHECK(res.steps_done == 0);
  CHECK(res.n0_final == 1);
  CHECK(res.last_return == 0);
  CHECK(res.trajectory.empty());
  CHECK_THROWS_AS(
      [] {
        PlainSrwModel m(2);
        RngBundle r = RngBundle::derive(0, 0);
        RunOptions o;
        o.horizon = -1;
        run(m, o, r);
      }(),
      std::invalid_argument);
}

TEST_CASE("same seed gives a bit-identical trajectory") {
  auto sample = [] {
    PlainSrwModel model(3);
    RngBundle rng = RngBundle::derive(2024, 5);
    RunOptions opts;
    opts.horizon = 5000;
    opts.record_trajectory = true;
    return run(model, opts, rng).trajectory;
  };
  CHECK(sample() == sample());
}

TEST_CASE("OBT far from its boundary equals plain SRW under a shared stream") {
  ObtModel obt(ball(Site(), 50, Metric::Graph, 2), ObtParams{ObtKind::Obt}, 2);
  PlainSrwModel plain(2);
  RngBundle rng_a = RngBundle::derive(77, 0);
  RngBundle rng_b = RngBundle::derive(77, 0);
  for (int t = 0; t < 40; ++t) {  // cannot reach the radius-50 shell in 40 steps
    obt.advance(rng_a);
    plain.advance(rng_b);
    CHECK(obt.position() == plain.position());
  }
}

TEST_CASE("stopping log follows the frozen-boundary semantics") {
  //      t: 0 1 2 3 4 5 6 7 8
  ScriptedBoundaryModel model({0, 1, 2, 3, 4, 3, 2, 1, 0});
  RngBundle rng = RngBundle::derive(0, 0);
  RunOptions opts;
  opts.horizon = 8;
  opts.track_stopping_log = true;
  opts.record_trajectory = true;
  opts.dist_cap = -1;
  RunResult res = run(model, opts, rng);

  const auto& recs = res.stopping_log.records;
  REQUIRE(recs.size() == 2);
  CHECK(recs[0].eta == 0);
  CHECK(recs[0].sigma == 3);  // first hit of the frozen boundary {3}
  CHECK(recs[0].a_n);         // X_0 = 0 falls inside [eta_0, sigma_0)
  CHECK(recs[0].start == Site(0));
  CHECK(recs[0].snapshot_tag == 3);
  // At times 3 and 4 the walk sits on the live boundary, so eta_1 waits.
  CHECK(recs[1].eta == 5);
  CHECK(recs[1].start == Site(3));
  CHECK(recs[1].snapshot_tag == 4);
  CHECK(recs[1].sigma == -1);  // 4 is never revisited
  CHECK(recs[1].a_n);          // X_8 = 0

  // Online A_n equals the offline recomputation from the trajectory.
  REQUIRE(res.frozen.size() == recs.size());
  for (const StoppingRecord& rec : recs) {
    long hi = rec.sigma >= 0 ? rec.sigma : static_cast<long>(res.trajectory.size());
    bool hit = false;
    for (long s = rec.eta; s < hi; ++s)
      if (res.trajectory[static_cast<size_t>(s)].is_origin()) hit = true;
    CHECK(rec.a_n == hit);
  }

  // Interval tiling: eta_0 = 0, sigma_n >= eta_n, eta_{n+1} >= sigma_n.
  CHECK(recs[0].eta == 0);
  for (size_t i = 0; i < recs.size(); ++i) {
    if (recs[i].sigma >= 0) CHECK(recs[i].sigma >= recs[i].eta);
    if (i + 1 < recs.size()) CHECK(recs[i + 1].eta >= recs[i].sigma);
  }
}

TEST_CASE("recurrence stats of a never-returning trajectory") {
  std::vector<Site> traj;
  for (int t = 0; t <= 10; ++t) traj.push_back(Site(t));
  std::vector<long> cps = {0, 2, 8, 10};
  RecurrenceCurve curve = recurrence_stats(traj, cps);
  REQUIRE(curve.n0_at.size() == 4);
  for (const auto& [t, n0] : curve.n0_at) CHECK(n0 == 1);
  CHECK(curve.last_return == 0);
}

TEST_CASE("graph distance dominates the l1 distance") {
  ObtModel model(ball(Site(), 2, Metric::Graph, 2), ObtParams{ObtKind::Obt}, 2);
  RngBundle rng = RngBundle::derive(31, 0);
  RunOptions opts;
  opts.horizon = 512;
  opts.record_trajectory = true;
  RunResult res = run(model, opts, rng);
  for (const CheckpointRow& row : res.checkpoints) {
    Site at = res.trajectory[static_cast<size_t>(row.t)];
    CHECK(row.dist >= l1_norm(at, 2));
  }

  // On the full lattice the two coincide.
  PlainSrwModel plain(2);
  RngBundle rng2 = RngBundle::derive(31, 1);
  for (int i = 0; i < 200; ++i) plain.advance(rng2);
  long bfs = graph_distance([&](const Site& z) { return plain.open_dirs(z); }, 2,
                            Site(), plain.position(), 4096);
  CHECK(bfs == l1_norm(plain.position(), 2));
}

TEST_CASE("1-d SRW revisits the origin often at desk scale") {
  int good = 0;
  for (uint64_t rep = 0; rep < 100; ++rep) {
    PlainSrwModel model(1);
    RngBundle rng = RngBundle::derive(4242, rep);
    RunOptions opts;
    opts.horizon = 1'000'000;
    opts.dist_cap = -1;
    RunResult res = run(model, opts, rng);
    if (res.n0_final > 100) ++good;
  }
  // N0(t)/sqrt(t) is roughly half-normal, so the per-replica success
  // probability is about 0.92; 85 leaves several sigmas of slack.
  CHECK(good >= 85);
}

TEST_CASE("dyadic checkpoint schedule") {
  CHECK(dyadic_checkpoints(10) == std::vector<long>{0, 1, 2, 4, 8, 10});
  CHECK(dyadic_checkpoints(8) == std::vector<long>{0, 1, 2, 4, 8});
  CHECK(dyadic_checkpoints(0) == std::vector<long>{0});
}

#include "scenforge/search.hpp"

#include <algorithm>
#include <array>
#include <cassert>
#include <numeric>
#include <queue>
#include <unordered_map>
#include <vector>

namespace scenforge {

void SearchConfig::validate(const ModelParams& params) const {
  if (max_steps < 2) throw std::invalid_argument("search config: max_steps must be >= 2");
  std::vector<Rat> menu = accel_menu.empty() ? default_accel_menu(params) : accel_menu;
  if (menu.empty()) throw std::invalid_argument("search config: accel menu is empty");
  for (const Rat& a : menu) {
    if (a < params.max_braking || a > params.max_acceleration) {
      throw std::invalid_argument("search config: accel menu entry " + rat_str(a) +
                                  " outside [max_braking, max_acceleration]");
    }
  }
}

std::vector<Rat> default_accel_menu(const ModelParams& params) {
  std::vector<Rat> menu{params.max_braking};
  for (const Rat& a : {Rat(-2), Rat(0), Rat(2)}) {
    if (a > params.max_braking && a < params.max_acceleration) menu.push_back(a);
  }
  menu.push_back(params.max_acceleration);
  menu.erase(std::unique(menu.begin(), menu.end()), menu.end());
  return menu;
}

const char* not_found_reason_name(NotFound::Reason r) {
  switch (r) {
    case NotFound::Reason::Budget: return "budget";
    case NotFound::Reason::Depth: return "depth";
    case NotFound::Reason::InfeasibleAtInit: return "infeasible-at-init";
  }
  return "?";
}

namespace {

using i64 = std::int64_t;
using u64 = std::uint64_t;
using i128 = __int128;

// ---------------------------------------------------------------------------
// Scaled-integer engine. All model quantities are multiples of 1/Ds (speeds)
// or 1/Dp (positions) for denominators derived once from the parameters, so
// every transition is exact int64 arithmetic. The public rational kernel in
// model.cpp stays the reference semantics; validate_trace replays traces
// through it independently of this engine.
// ---------------------------------------------------------------------------

struct SCar {
  i64 pos = 0;
  i64 speed = 0;
  std::int8_t lane = 0;
  std::int8_t slc = 0;  // saturating steps since lane change (non-egos)

  bool operator==(const SCar&) const = default;
};

struct SWorld {
  SCar ego, c1, c2;
  bool operator==(const SWorld&) const = default;
};

struct SKey {
  SWorld w;
  std::uint8_t flag = 0;
  bool operator==(const SKey&) const = default;
};

u64 hash_scar(u64 h, const SCar& c) {
  h = hash_mix(h, static_cast<u64>(c.pos));
  h = hash_mix(h, static_cast<u64>(c.speed));
  return hash_mix(h, (static_cast<u64>(static_cast<std::uint8_t>(c.lane)) << 8) |
                         static_cast<u64>(static_cast<std::uint8_t>(c.slc)));
}

struct SWorldHash {
  std::size_t operator()(const SWorld& w) const {
    u64 h = 0x243f6a8885a308d3ULL;
    h = hash_scar(h, w.ego);
    h = hash_scar(h, w.c1);
    return hash_scar(h, w.c2);
  }
};

struct SKeyHash {
  std::size_t operator()(const SKey& k) const {
    return hash_mix(SWorldHash{}(k.w), k.flag);
  }
};

// Lane relation + longitudinal band equivalent of one cell's predicate.
struct CellBand {
  i64 lo = 0, hi = 0;  // inclusive band for (car.pos - ego.pos), scaled
  int lane_rel = 0;    // -1: car left of ego, 0: same lane, +1: right
};

struct Engine {
  ModelParams params;
  std::vector<Rat> menu;
  bool allow_lane_actions = true;

  i64 Ds = 1, Dp = 1;
  std::vector<i64> dv;        // menu accel * dt, speed scale
  std::vector<bool> lc_ok;    // menu entry legal while changing lane
  i64 smin = 0, smax = 0, mlcs = 0;
  i64 cruise = 0, ego_acc = 0, ego_brk = 0;
  i64 ks = 0, kl = 0;         // position increment multipliers
  i64 safe = 0;
  i64 near_b = 0, far_b = 0, adj_b = 0;  // generation bounds, position scale
  i64 brk_n = 1, brk_d = 1;   // -max_braking > 0
  int max_lane = 2, spacing = 0, ego_lane = 1;
  i64 rel_per_step = 0;       // max |d(car.pos - ego.pos)| per step, pos scale

  Engine(const ModelParams& p, const SearchConfig& cfg, const GridBounds& bounds)
      : params(p),
        menu(cfg.accel_menu.empty() ? default_accel_menu(p) : cfg.accel_menu),
        allow_lane_actions(cfg.allow_lane_actions) {
    const Rat dt = p.time_step;
    auto fold = [](i64 acc, i64 d) { return std::lcm(acc, d); };
    Ds = 1;
    for (const Rat& a : menu) Ds = fold(Ds, (a * dt).denominator());
    Ds = fold(Ds, p.ego_cruise_speed.denominator());
    Ds = fold(Ds, (p.max_acceleration * dt).denominator());
    Ds = fold(Ds, (p.max_braking * dt).denominator());
    Ds = fold(Ds, p.non_ego_speed_min.denominator());
    Ds = fold(Ds, p.non_ego_speed_max.denominator());
    Ds = fold(Ds, p.max_lane_change_speed.denominator());
    if (Ds > 1'000'000) throw std::invalid_argument("search: speed denominators too large");

    const i64 td = dt.denominator();
    const i64 fd = p.lane_change_pos_factor.denominator();
    Dp = 2 * Ds * td * fd;
    Dp = fold(Dp, p.safe_distance.denominator());
    Dp = fold(Dp, bounds.near_min.denominator());
    Dp = fold(Dp, bounds.far_max.denominator());
    Dp = fold(Dp, bounds.adjacent_max.denominator());
    if (Dp > 1'000'000'000) throw std::invalid_argument("search: position denominators too large");

    auto sspeed = [&](const Rat& v) {
      Rat scaled = v * Rat(Ds);
      if (scaled.denominator() != 1) throw std::logic_error("speed scale construction broken");
      return scaled.numerator();
    };
    auto spos = [&](const Rat& v) {
      Rat scaled = v * Rat(Dp);
      if (scaled.denominator() != 1) throw std::logic_error("position scale construction broken");
      return scaled.numerator();
    };
    for (const Rat& a : menu) {
      dv.push_back(sspeed(a * dt));
      lc_ok.push_back(a <= p.max_lane_change_acceleration &&
                      a >= -p.max_lane_change_braking);
    }
    smin = sspeed(p.non_ego_speed_min);
    smax = sspeed(p.non_ego_speed_max);
    mlcs = sspeed(p.max_lane_change_speed);
    cruise = sspeed(p.ego_cruise_speed);
    ego_acc = sspeed(p.max_acceleration * dt);
    ego_brk = sspeed(-p.max_braking * dt);
    ks = Dp * dt.numerator() / (2 * Ds * td);
    kl = Dp * dt.numerator() * p.lane_change_pos_factor.numerator() / (2 * Ds * td * fd);
    safe = spos(p.safe_distance);
    near_b = spos(bounds.near_min);
    far_b = spos(bounds.far_max);
    adj_b = spos(bounds.adjacent_max);
    Rat nb = -p.max_braking;
    brk_n = nb.numerator();
    brk_d = nb.denominator();
    max_lane = p.max_lane;
    spacing = p.lane_change_spacing_steps;
    ego_lane = p.ego_lane();
    rel_per_step = spos(std::max(p.non_ego_speed_max, p.ego_cruise_speed) * dt);
  }

  SWorld initial() const {
    SWorld w;
    w.ego.lane = static_cast<std::int8_t>(ego_lane);
    w.c1.lane = static_cast<std::int8_t>(ego_lane - 1);
    w.c2.lane = static_cast<std::int8_t>(ego_lane + 1);
    w.c1.slc = static_cast<std::int8_t>(spacing);
    w.c2.slc = static_cast<std::int8_t>(spacing);
    return w;
  }

  bool collision_next(const SCar& ego, const SCar& car) const {
    if (car.lane != ego.lane || car.pos < ego.pos || ego.speed <= 0) return false;
    // (dpos/Dp)*(brk_n/brk_d) <= (speed/Ds)^2
    i128 lhs = i128(car.pos - ego.pos) * brk_n * Ds * Ds;
    i128 rhs = i128(ego.speed) * ego.speed * Dp * brk_d;
    return lhs <= rhs;
  }

  SCar ego_next(const SWorld& w) const {
    const SCar& e = w.ego;
    i64 v2;
    if (collision_next(e, w.c1) || collision_next(e, w.c2)) {
      v2 = std::max<i64>(e.speed - ego_brk, 0);
    } else if (e.speed < cruise) {
      v2 = std::min(cruise, e.speed + ego_acc);
    } else {
      v2 = e.speed;
    }
    SCar n = e;
    n.pos = e.pos + (e.speed + v2) * ks;
    n.speed = v2;
    return n;
  }

  bool car_next(const SCar& c, int menu_idx, int dl, SCar* out) const {
    const bool changing = dl != 0;
    if (changing) {
      int nl = c.lane + dl;
      if (nl < 0 || nl > max_lane) return false;
      if (c.slc < spacing) return false;
      if (c.speed > mlcs) return false;
      if (!lc_ok[static_cast<std::size_t>(menu_idx)]) return false;
    }
    i64 v2 = std::max<i64>(c.speed + dv[static_cast<std::size_t>(menu_idx)], 0);
    if (changing && v2 > mlcs) return false;
    if (v2 < smin || v2 > smax) return false;
    out->pos = c.pos + (c.speed + v2) * (changing ? kl : ks);
    out->speed = v2;
    out->lane = static_cast<std::int8_t>(c.lane + dl);
    out->slc = changing ? 0 : static_cast<std::int8_t>(std::min(c.slc + 1, spacing));
    return true;
  }

  bool pair_safe(const SCar& a, const SCar& b) const {
    if (a.lane != b.lane) return true;
    i64 gap = a.pos - b.pos;
    if (gap < 0) gap = -gap;
    return gap > safe;
  }

  bool invariants_ok(const SWorld& w) const {
    return pair_safe(w.ego, w.c1) && pair_safe(w.ego, w.c2) && pair_safe(w.c1, w.c2);
  }

  std::uint16_t cell_mask_of(const SCar& ego, const SCar& car) const {
    return detail::cell_mask<i64>(ego.lane, ego.pos, car.lane, car.pos, near_b, far_b, adj_b);
  }

  CellBand band_for(GridCell cell) const {
    CellBand b;
    switch (cell) {
      case GridCell::FrontLeft: b = {near_b, far_b, -1}; break;
      case GridCell::FrontCenter: b = {near_b, far_b, 0}; break;
      case GridCell::FrontRight: b = {near_b, far_b, +1}; break;
      case GridCell::Left: b = {-adj_b, adj_b, -1}; break;
      case GridCell::Right: b = {-adj_b, adj_b, +1}; break;
      case GridCell::RearLeft: b = {-far_b, -near_b, -1}; break;
      case GridCell::RearCenter: b = {-far_b, -near_b, 0}; break;
      case GridCell::RearRight: b = {-far_b, -near_b, +1}; break;
      case GridCell::Outside: throw std::invalid_argument("outside has no band");
    }
    return b;
  }

  bool car_in_band(const SCar& ego, const SCar& car, const CellBand& b) const {
    int rel = car.lane < ego.lane ? -1 : (car.lane == ego.lane ? 0 : +1);
    if (rel != b.lane_rel) return false;
    i64 d = car.pos - ego.pos;
    return d >= b.lo && d <= b.hi;
  }

  // Distance from the car to the nearest lane satisfying the band's relation.
  int lane_need(const SCar& car, const CellBand& b) const {
    if (b.lane_rel < 0) return car.lane < ego_lane ? 0 : car.lane - (ego_lane - 1);
    if (b.lane_rel > 0) return car.lane > ego_lane ? 0 : (ego_lane + 1) - car.lane;
    return std::abs(car.lane - ego_lane);
  }

  i64 band_dist(const SCar& ego, const SCar& car, const CellBand& b) const {
    i64 d = car.pos - ego.pos;
    if (d < b.lo) return b.lo - d;
    if (d > b.hi) return d - b.hi;
    return 0;
  }

  // Admissible minimum steps to put one car into its band (lane + distance).
  int steps_lower_bound(const SCar& ego, const SCar& car, const CellBand& b) const {
    int lane_lb = 0;
    int n = lane_need(car, b);
    if (n > 0) {
      int wait = std::max(0, spacing - car.slc);
      lane_lb = spacing == 0 ? wait + n : wait + 1 + (n - 1) * spacing;
    }
    i64 dist = band_dist(ego, car, b);
    int long_lb = 0;
    if (dist > 0) {
      long_lb = static_cast<int>((dist + rel_per_step - 1) / rel_per_step);
    }
    return std::max(lane_lb, long_lb);
  }
};

struct TargetBands {
  CellBand c1, c2;
};

TargetBands bands_for(const Engine& eng, const GridConfig& cfg) {
  return TargetBands{eng.band_for(cfg.car1_cell), eng.band_for(cfg.car2_cell)};
}

bool config_holds_scaled(const Engine& eng, const SWorld& w, const TargetBands& t) {
  return eng.car_in_band(w.ego, w.c1, t.c1) && eng.car_in_band(w.ego, w.c2, t.c2);
}

u64 splitmix64(u64 x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Node {
  SWorld w;
  std::int32_t parent = -1;
  std::int16_t step = 0;
  std::uint8_t flag = 0;
  std::uint8_t a1 = 0, a2 = 0;  // action ids: menu_index*3 + (lane_delta+1)
};

struct QueueEntry {
  i64 f = 0;
  std::int16_t step = 0;
  u64 tie = 0;
  std::int32_t node = -1;
  bool operator>(const QueueEntry& o) const {
    if (f != o.f) return f > o.f;
    if (step != o.step) return step < o.step;  // deeper first on equal score
    if (tie != o.tie) return tie > o.tie;
    return node > o.node;
  }
};

constexpr std::size_t kArenaCap = 16u << 20;  // hard memory stop, ~1 GiB of nodes

ControlInput action_input(const Engine& eng, std::uint8_t action) {
  return ControlInput{eng.menu[action / 3], static_cast<int>(action % 3) - 1};
}

struct CarCandidate {
  SCar car;
  std::uint8_t action;
};

void gen_candidates(const Engine& eng, const SCar& car, const SCar& next_ego,
                    std::vector<CarCandidate>& out) {
  out.clear();
  const int menu_n = static_cast<int>(eng.menu.size());
  for (int mi = 0; mi < menu_n; ++mi) {
    for (int dl = -1; dl <= 1; ++dl) {
      if (dl != 0 && !eng.allow_lane_actions) continue;
      SCar next;
      if (!eng.car_next(car, mi, dl, &next)) continue;
      if (!eng.pair_safe(next, next_ego)) continue;
      out.push_back({next, static_cast<std::uint8_t>(mi * 3 + (dl + 1))});
    }
  }
}

}  // namespace

SearchResult find_witness(const ScenarioSpec& spec, const ModelParams& params,
                          const SearchConfig& cfg) {
  params.validate();
  cfg.validate(params);
  const GridBounds bounds = GridBounds::generation();
  Engine eng(params, cfg, bounds);

  const TargetBands first = bands_for(eng, spec.first);
  const TargetBands second = bands_for(eng, spec.second);
  const i64 lane_cost = 10 * eng.Dp;
  const i64 phase_penalty = 50 * eng.Dp;
  // A pending lane change is blocked while the car is faster than the
  // lane-change speed bound; surcharge the overspeed so braking looks useful.
  const i64 overspeed_cost = 3 * eng.Dp / eng.Ds;

  // Knobs rotated between restart slices. Commitments the score function
  // cannot rank (which side to dwell on, which car goes ahead when the bands
  // leave it open) are alternated instead of guessed once.
  struct SliceVariant {
    u64 tie_seed = 0;
    bool dwell_behind = false;
    int order_fallback = 0;
    int a_order_mode = 0;  // 0: follow the B-order hint, 1: invert it, 2: drop it
  };
  SliceVariant variant;

  // Per-car guidance is staged: while lane changes are still pending the car
  // aims for a staging interval (on the side of the ego's lane its entry
  // constraint allows), and only in the target lane does the exact cell band
  // take over. Mixing both pulls in opposite directions mid-route.
  auto car_h = [&](const SCar& ego, const SCar& car, const CellBand& band) -> i64 {
    int lanes = eng.lane_need(car, band);
    if (lanes == 0 && band.lane_rel == 0) {
      // Inside the ego's lane the +-safe_distance ring cannot be crossed
      // longitudinally; reaching the band on the other side of the ego takes
      // an exit and a re-entry.
      const i64 d = car.pos - ego.pos;
      if ((band.hi < 0 && d > band.hi) || (band.lo > 0 && d < band.lo)) lanes = 2;
    }
    if (lanes == 0) return eng.band_dist(ego, car, band);
    i64 h = lane_cost * lanes;
    if (car.speed > eng.mlcs) h += (car.speed - eng.mlcs) * overspeed_cost;
    // reward sitting out the spacing countdown
    h += eng.Dp * std::max(0, eng.spacing - static_cast<int>(car.slc));
    const bool target_eq = band.lane_rel == 0;
    const bool crosses_eq = !target_eq && ((band.lane_rel < 0 && car.lane > eng.ego_lane) ||
                                           (band.lane_rel > 0 && car.lane < eng.ego_lane));
    const i64 d = car.pos - ego.pos;
    if (target_eq || crosses_eq || car.lane == eng.ego_lane) {
      // entering or dwelling in the ego's lane is only legal strictly more
      // than safe_distance away, on the side where the target band lies
      const i64 gate = eng.safe + eng.Dp;
      const i64 mid = band.lo + band.hi;
      const bool behind = mid < 0 || (mid == 0 && variant.dwell_behind);
      const i64 lo = behind ? -eng.far_b : gate;
      const i64 hi = behind ? -gate : eng.far_b;
      if (d < lo) h += lo - d;
      else if (d > hi) h += d - hi;
    } else {
      h += eng.band_dist(ego, car, band);
    }
    return h;
  };
  // Which car must end up ahead when both targets sit in the same lane:
  // +1 car1 ahead, -1 car2 ahead, 0 free. Cars cannot swap longitudinal
  // order within a lane (the no-crash invariant forbids closing the gap),
  // so committing to the right order early is what makes these solvable.
  auto band_order = [](const TargetBands& t) -> int {
    i64 mid1 = t.c1.lo + t.c1.hi, mid2 = t.c2.lo + t.c2.hi;
    return mid1 > mid2 ? 1 : (mid1 < mid2 ? -1 : 0);
  };
  const int order_second = band_order(second);
  const int order_first = band_order(first);

  // Scores are quantized to whole meters: states that differ only in
  // centimeters form one plateau, and the deeper-first tie break turns
  // plateau exploration into a dive instead of a breadth sweep.
  auto heuristic = [&](const SWorld& w, std::uint8_t flag) -> i64 {
    const TargetBands& t = flag ? second : first;
    i64 h = car_h(w.ego, w.c1, t.c1) + car_h(w.ego, w.c2, t.c2);
    if (t.c1.lane_rel == t.c2.lane_rel) {
      // Both cars head for the same lane: open the safe gap early, in the
      // order the bands demand. At phase A the order the B-bands suggest can
      // be exactly wrong for multi-crossing plans, so its polarity rotates
      // with the restart variant.
      int order;
      if (flag) {
        order = order_second;
      } else if (order_first != 0) {
        order = order_first;
      } else {
        order = variant.a_order_mode == 0
                    ? order_second
                    : (variant.a_order_mode == 1 ? -order_second : 0);
      }
      if (order == 0) order = variant.order_fallback;
      const i64 want = eng.safe + eng.Dp;
      const i64 d = w.c1.pos - w.c2.pos;
      i64 shortfall = 0;
      if (order > 0) {
        shortfall = want - d;
      } else if (order < 0) {
        shortfall = want + d;
      } else {
        shortfall = want - (d < 0 ? -d : d);
      }
      if (shortfall > 0) h += shortfall;
    }
    if (!flag) h += phase_penalty;
    return h / eng.Dp;
  };
  auto reachable_within = [&](const SWorld& w, std::uint8_t flag, int remaining) -> bool {
    if (flag) {
      return std::max(eng.steps_lower_bound(w.ego, w.c1, second.c1),
                      eng.steps_lower_bound(w.ego, w.c2, second.c2)) <= remaining;
    }
    int lb = std::max(eng.steps_lower_bound(w.ego, w.c1, first.c1),
                      eng.steps_lower_bound(w.ego, w.c2, first.c2));
    return lb + 1 <= remaining;
  };

  const SWorld init = eng.initial();
  if (!eng.invariants_ok(init)) {
    return NotFound{NotFound::Reason::InfeasibleAtInit, 0};
  }

  std::vector<Node> arena;
  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> queue;
  std::unordered_map<SKey, std::int16_t, SKeyHash> best_step;
  std::vector<CarCandidate> cand1, cand2;

  u64 pushes = 0;
  auto push = [&](Node n) {
    SKey key{n.w, n.flag};
    auto it = best_step.find(key);
    if (it != best_step.end() && it->second <= n.step) return;
    if (it == best_step.end()) {
      best_step.emplace(key, n.step);
    } else {
      it->second = n.step;
    }
    if (arena.size() >= kArenaCap) throw BudgetExceeded("search arena cap reached");
    arena.push_back(n);
    queue.push(QueueEntry{heuristic(n.w, n.flag), n.step,
                          splitmix64(variant.tie_seed ^ (0x9e3779b97f4a7c15ULL * ++pushes)),
                          static_cast<std::int32_t>(arena.size() - 1)});
  };

  u64 total_expanded = 0;
  std::int32_t goal = -1;
  std::optional<Node> goal_node;

  // Restart schedule: the score function cannot rank everything, and a bad
  // early commitment strands the dive in a dead region for the rest of the
  // budget. Short slices with rotated tie seeds and flipped ambiguous
  // commitments recover cheaply; the final slice runs out the whole budget so
  // small state spaces are still exhausted exactly.
  constexpr u64 kSliceBudget = 20'000;
  constexpr int kMaxRestarts = 48;
  for (int slice = 0;; ++slice) {
    const u64 remaining_budget = cfg.node_budget - total_expanded;
    if (remaining_budget == 0) {
      return NotFound{NotFound::Reason::Budget, total_expanded};
    }
    const bool final_slice =
        slice >= kMaxRestarts || remaining_budget <= kSliceBudget * 2;
    const u64 slice_budget = final_slice ? remaining_budget : kSliceBudget;

    variant.tie_seed = splitmix64(cfg.rng_seed + 0x51ce5eedULL * static_cast<u64>(slice));
    variant.dwell_behind = (slice & 1) != 0;
    variant.order_fallback = (slice % 3) == 0 ? 0 : ((slice % 3) == 1 ? 1 : -1);
    variant.a_order_mode = (slice / 2) % 3;

    arena.clear();
    best_step.clear();
    queue = {};
    pushes = 0;

    Node root;
    root.w = init;
    root.flag = config_holds_scaled(eng, init, first) ? 1 : 0;
    push(root);

    u64 expanded = 0;
    bool exhausted = false;
    try {
      while (!queue.empty()) {
        if (expanded >= slice_budget) break;
        QueueEntry top = queue.top();
        queue.pop();
        const Node node = arena[static_cast<std::size_t>(top.node)];
        auto it = best_step.find(SKey{node.w, node.flag});
        if (it == best_step.end() || it->second < node.step) continue;  // stale
        ++expanded;
        if (node.step >= cfg.max_steps) continue;
        const int remaining = cfg.max_steps - node.step;

        const SCar next_ego = eng.ego_next(node.w);
        gen_candidates(eng, node.w.c1, next_ego, cand1);
        if (cand1.empty()) continue;
        gen_candidates(eng, node.w.c2, next_ego, cand2);

        for (const CarCandidate& k1 : cand1) {
          for (const CarCandidate& k2 : cand2) {
            if (!eng.pair_safe(k1.car, k2.car)) continue;
            Node child;
            child.w = SWorld{next_ego, k1.car, k2.car};
            child.parent = top.node;
            child.step = static_cast<std::int16_t>(node.step + 1);
            child.a1 = k1.action;
            child.a2 = k2.action;
            if (node.flag && config_holds_scaled(eng, child.w, second)) {
              child.flag = 1;
              goal_node = child;
              goal = top.node;
              break;
            }
            child.flag = (node.flag || config_holds_scaled(eng, child.w, first)) ? 1 : 0;
            if (!reachable_within(child.w, child.flag, remaining - 1)) continue;
            push(child);
          }
          if (goal >= 0) break;
        }
        if (goal >= 0) break;
      }
      exhausted = queue.empty() && goal < 0;
    } catch (const BudgetExceeded&) {
      return NotFound{NotFound::Reason::Budget, total_expanded + expanded};
    }

    total_expanded += expanded;
    if (goal >= 0) break;
    if (exhausted) {
      // the whole reachable space fits under the slice budget: no witness
      return NotFound{NotFound::Reason::Depth, total_expanded};
    }
    if (total_expanded >= cfg.node_budget) {
      return NotFound{NotFound::Reason::Budget, total_expanded};
    }
  }

  // Reconstruct the action sequence, then replay it through the rational
  // kernel so the returned trace is exact.
  std::vector<std::pair<std::uint8_t, std::uint8_t>> actions;
  actions.emplace_back(goal_node->a1, goal_node->a2);
  for (std::int32_t at = goal; arena[static_cast<std::size_t>(at)].parent >= 0;
       at = arena[static_cast<std::size_t>(at)].parent) {
    const Node& n = arena[static_cast<std::size_t>(at)];
    actions.emplace_back(n.a1, n.a2);
  }
  std::reverse(actions.begin(), actions.end());

  AbstractTrace trace;
  trace.spec_id = spec.id;
  trace.params_hash = params.hash();
  trace.spec_first = spec.first;
  trace.spec_second = spec.second;
  trace.states.push_back(initial_world(params));
  for (const auto& [a1, a2] : actions) {
    ControlInput in1 = action_input(eng, a1);
    ControlInput in2 = action_input(eng, a2);
    trace.inputs.emplace_back(in1, in2);
    trace.states.push_back(advance_world(trace.states.back(), in1, in2, params));
  }

  // A short coast-out tail keeps the final scene on stage when the trace is
  // concretized; stop as soon as coasting would violate a constraint.
  const ControlInput coast{Rat(0), 0};
  for (int pad = 0; pad < 3; ++pad) {
    const WorldState& last = trace.states.back();
    VehicleState c1n, c2n;
    StepConstraint ignored;
    if (!try_step_vehicle(last.car1, coast, params, &c1n, &ignored)) break;
    if (!try_step_vehicle(last.car2, coast, params, &c2n, &ignored)) break;
    WorldState next;
    next.ego = ego_step(last, params);
    next.car1 = c1n;
    next.car2 = c2n;
    next.step_index = last.step_index + 1;
    if (!check_invariants(next, params).empty()) break;
    trace.inputs.emplace_back(coast, coast);
    trace.states.push_back(next);
  }

  const GridBounds gen = GridBounds::generation();
  trace.phase2_index = -1;
  for (std::size_t i = 0; i < trace.states.size(); ++i) {
    if (trace.phase1_index < 0 && config_holds(spec.first, trace.states[i], gen)) {
      trace.phase1_index = static_cast<int>(i);
    }
  }
  for (std::size_t i = trace.states.size(); i-- > 0;) {
    if (static_cast<int>(i) > trace.phase1_index &&
        config_holds(spec.second, trace.states[i], gen)) {
      trace.phase2_index = static_cast<int>(i);
      break;
    }
  }
  assert(trace.phase1_index >= 0 && trace.phase2_index > trace.phase1_index);
  return trace;
}

std::set<ReachPair> exhaustive_reach(const ModelParams& params, const SearchConfig& cfg,
                                     int depth) {
  params.validate();
  cfg.validate(params);
  if (depth < 1 || depth > 8) {
    throw std::invalid_argument("exhaustive_reach: depth must be in 1..8");
  }
  std::vector<Rat> menu = cfg.accel_menu.empty() ? default_accel_menu(params) : cfg.accel_menu;
  if (menu.size() > 3) {
    throw std::invalid_argument("exhaustive_reach: accel menu must have at most 3 entries");
  }
  const GridBounds bounds = GridBounds::generation();
  SearchConfig eff = cfg;
  eff.accel_menu = menu;
  Engine eng(params, eff, bounds);

  // Bit i*8+j of a config mask: car1 in cell i+1 and car2 in cell j+1.
  auto config_mask = [&](const SWorld& w) -> u64 {
    std::uint16_t m1 = eng.cell_mask_of(w.ego, w.c1);
    std::uint16_t m2 = eng.cell_mask_of(w.ego, w.c2);
    u64 out = 0;
    for (int i = 1; i <= 8; ++i) {
      if (!(m1 & (1u << i))) continue;
      for (int j = 1; j <= 8; ++j) {
        if (m2 & (1u << j)) out |= 1ULL << ((i - 1) * 8 + (j - 1));
      }
    }
    return out;
  };

  const SWorld init = eng.initial();
  if (!eng.invariants_ok(init)) return {};

  std::vector<std::vector<SWorld>> layers(static_cast<std::size_t>(depth) + 1);
  std::vector<std::unordered_map<SWorld, std::uint32_t, SWorldHash>> index(
      static_cast<std::size_t>(depth) + 1);
  layers[0].push_back(init);
  index[0].emplace(init, 0);

  u64 work = 0;
  auto charge = [&](u64 amount) {
    work += amount;
    if (work > cfg.node_budget) {
      throw BudgetExceeded("exhaustive_reach: node budget exceeded (" +
                           std::to_string(work) + " nodes)");
    }
  };

  std::vector<CarCandidate> cand1, cand2;
  auto for_each_successor = [&](const SWorld& w, auto&& fn) {
    const SCar next_ego = eng.ego_next(w);
    gen_candidates(eng, w.c1, next_ego, cand1);
    if (cand1.empty()) return;
    gen_candidates(eng, w.c2, next_ego, cand2);
    for (const CarCandidate& k1 : cand1) {
      for (const CarCandidate& k2 : cand2) {
        if (!eng.pair_safe(k1.car, k2.car)) continue;
        fn(SWorld{next_ego, k1.car, k2.car});
      }
    }
  };

  for (int t = 0; t < depth; ++t) {
    auto& next_layer = layers[static_cast<std::size_t>(t) + 1];
    auto& next_index = index[static_cast<std::size_t>(t) + 1];
    for (const SWorld& w : layers[static_cast<std::size_t>(t)]) {
      charge(1);
      for_each_successor(w, [&](const SWorld& s) {
        if (next_index.emplace(s, static_cast<std::uint32_t>(next_layer.size())).second) {
          charge(1);
          next_layer.push_back(s);
        }
      });
    }
  }

  // Backward pass: after[t][k] = configs seen strictly after layer-t state k
  // along some run. Pair (A,B) is witnessed iff B in after of an A-state.
  std::array<u64, 64> pairs{};
  std::vector<u64> after_next(layers[static_cast<std::size_t>(depth)].size(), 0);
  for (int t = depth - 1; t >= 0; --t) {
    const auto& layer = layers[static_cast<std::size_t>(t)];
    const auto& nidx = index[static_cast<std::size_t>(t) + 1];
    const auto& nlayer = layers[static_cast<std::size_t>(t) + 1];
    std::vector<u64> after(layer.size(), 0);
    for (std::size_t k = 0; k < layer.size(); ++k) {
      u64 acc = 0;
      for_each_successor(layer[k], [&](const SWorld& s) {
        auto it = nidx.find(s);
        assert(it != nidx.end());
        acc |= config_mask(nlayer[it->second]) | after_next[it->second];
      });
      after[k] = acc;
      u64 own = config_mask(layer[k]);
      while (own) {
        int bit = __builtin_ctzll(own);
        own &= own - 1;
        pairs[static_cast<std::size_t>(bit)] |= acc;
      }
    }
    after_next = std::move(after);
  }

  std::set<ReachPair> out;
  for (int a = 0; a < 64; ++a) {
    u64 bs = pairs[static_cast<std::size_t>(a)];
    while (bs) {
      int b = __builtin_ctzll(bs);
      bs &= bs - 1;
      GridConfig first{cell_from_number(a / 8 + 1), cell_from_number(a % 8 + 1)};
      GridConfig second{cell_from_number(b / 8 + 1), cell_from_number(b % 8 + 1)};
      out.insert({first, second});
    }
  }
  return out;
}

}  // namespace scenforge

#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace paclab {

enum class Variant { MultiStage, MultiStageAdvantage };

struct ScheduleParams {
    double discount = 0.9;
    double epsilon = 0.1;
    double failure_prob = 0.05;
    int num_states = 1;
    int num_actions = 1;
    Variant variant = Variant::MultiStage;
    double c1 = 1.0;
    double c10 = 1.0;
    // Theoretical N0/N1 are astronomically large; desk-scale runs cap them.
    std::optional<std::int64_t> cap_n0 = 1'000'000;
    std::optional<std::int64_t> cap_n1 = 10'000;
};

/// H = ceil(max{ ln(8/((1-g)eps)) / ln(1/g), 1/(1-g) }).
int horizon(double discount, double epsilon);

/// iota = ln(2/p).
double iota_constant(double failure_prob);

/// d1 = H, d_{j+1} = floor((1+1/H) d_j); exact in integer arithmetic.
std::vector<std::int64_t> d_sequence(int H, std::int64_t count);

struct StageIndex {
    std::int64_t stage = 0;
    bool boundary = false;
};

/// All schedule constants plus the stage-length machinery for both stage
/// types. Type-I stage j has length d_{ceil(j/B)} (B stays real-valued for
/// the MultiStage variant), type-II stage j has length d_j. The final type-I
/// stage is truncated so the trigger partial sums end exactly at N0.
class StageSchedule {
public:
    static StageSchedule build(const ScheduleParams& params);

    // Direct construction, used by tests and explicit overrides.
    StageSchedule(int H, double B, std::int64_t n0, std::int64_t n1, double iota,
                  Variant variant = Variant::MultiStage);

    int H() const { return h_; }
    double B() const { return b_; }
    double iota() const { return iota_; }
    std::int64_t N0() const { return n0_; }
    std::int64_t N1() const { return n1_; }
    Variant variant() const { return variant_; }

    std::int64_t num_type1_stages() const { return j_check_; }  // J-check
    std::int64_t num_type2_stages() const { return j_bar_; }    // J-bar

    /// Untruncated formula length of the j-th type-I stage, d_{ceil(j/B)}.
    std::int64_t type1_length(std::int64_t j) const;
    /// Length of the j-th type-II stage, d_j.
    std::int64_t type2_length(std::int64_t j) const;

    /// Stage containing visit count n (1 <= n <= N0) and whether n closes it.
    StageIndex type1_stage_index(std::int64_t n) const;
    StageIndex type2_stage_index(std::int64_t n) const;

    std::vector<std::int64_t> d_values(std::int64_t count) const;
    /// First `count` type-I trigger counts (the truncated partial sums).
    std::vector<std::int64_t> type1_triggers(std::int64_t count) const;
    /// First `count` type-II trigger counts (partial sums up to J-bar).
    std::vector<std::int64_t> type2_triggers(std::int64_t count) const;

private:
    int h_ = 1;
    double b_ = 1.0;
    double iota_ = 0.0;
    std::int64_t n0_ = 0;
    std::int64_t n1_ = 0;
    Variant variant_ = Variant::MultiStage;
    std::int64_t j_check_ = 0;
    std::int64_t j_bar_ = 0;

    void compute_stage_counts();
};

/// O(1)-per-visit trigger bookkeeping for one state-action pair. Stage
/// boundaries come out exactly as in StageSchedule::type{1,2}_stage_index.
class StageCursor {
public:
    StageCursor() = default;
    explicit StageCursor(const StageSchedule& schedule);

    struct Boundaries {
        bool type1 = false;
        bool type2 = false;
    };

    /// Registers one more visit and reports which stage(s) it closes.
    /// Type-I boundaries stop at N0 (truncation); type-II boundaries report
    /// raw partial sums and the caller applies the n <= N0 gate.
    Boundaries advance();

    std::int64_t visits() const { return n_; }

    // Snapshot plumbing for agent checkpointing.
    struct State {
        std::int64_t n, j1, k1, d1, end1, j2, d2, end2;
    };
    State state() const;
    void restore(const StageSchedule& schedule, const State& s);

private:
    const StageSchedule* sched_ = nullptr;
    std::int64_t n_ = 0;
    std::int64_t j1_ = 1;    // current type-I stage
    std::int64_t k1_ = 1;    // d-index ceil(j1/B)
    std::int64_t d1_ = 1;    // d_{k1}
    std::int64_t end1_ = 0;  // visit count closing the current type-I stage
    std::int64_t j2_ = 1;
    std::int64_t d2_ = 1;
    std::int64_t end2_ = 0;
};

}  // namespace paclab

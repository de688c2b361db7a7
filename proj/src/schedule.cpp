#include "paclab/schedule.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace paclab {

namespace {

constexpr std::int64_t kNoMoreStages = std::numeric_limits<std::int64_t>::max();

// d_{k+1} from d_k; exact because floor((1+1/H)d) = d + floor(d/H) for integer d.
inline std::int64_t next_d(std::int64_t d, int H) { return d + d / H; }

// ceil(j / B). Integer-valued B uses exact integer arithmetic; otherwise the
// ceiling of the double division (B = sqrt(H) is irrational, so the quotient
// never sits on an integer and the rounding error cannot flip the ceiling at
// the magnitudes we index).
inline std::int64_t ceil_div_real(std::int64_t j, double B) {
    if (B == std::floor(B)) {
        auto bi = static_cast<std::int64_t>(B);
        return (j + bi - 1) / bi;
    }
    return static_cast<std::int64_t>(std::ceil(static_cast<double>(j) / B));
}

std::int64_t ceil_to_int64_checked(double x, const char* what) {
    if (!std::isfinite(x) || x >= 9.2e18) {
        throw std::overflow_error(std::string(what) + " exceeds the 64-bit integer range");
    }
    return static_cast<std::int64_t>(std::ceil(x));
}

}  // namespace

int horizon(double discount, double epsilon) {
    if (!(discount > 0.0) || !(discount < 1.0)) {
        throw std::invalid_argument("horizon: discount must lie in (0,1)");
    }
    double vmax = 1.0 / (1.0 - discount);
    if (!(epsilon > 0.0) || epsilon > vmax) {
        throw std::invalid_argument("horizon: epsilon must lie in (0, 1/(1-discount)]");
    }
    double h = std::max(std::log(8.0 / ((1.0 - discount) * epsilon)) / std::log(1.0 / discount), vmax);
    double c = std::ceil(h);
    if (c > 2e9) throw std::overflow_error("horizon: H exceeds the supported range");
    return static_cast<int>(c);
}

double iota_constant(double failure_prob) {
    if (!(failure_prob > 0.0) || !(failure_prob < 1.0)) {
        throw std::invalid_argument("iota: failure probability must lie in (0,1)");
    }
    return std::log(2.0 / failure_prob);
}

std::vector<std::int64_t> d_sequence(int H, std::int64_t count) {
    if (H < 1) throw std::invalid_argument("d_sequence: H must be >= 1");
    if (count < 1) throw std::invalid_argument("d_sequence: count must be >= 1");
    std::vector<std::int64_t> d;
    d.reserve(static_cast<std::size_t>(count));
    std::int64_t cur = H;
    for (std::int64_t j = 0; j < count; ++j) {
        d.push_back(cur);
        cur = next_d(cur, H);
    }
    return d;
}

StageSchedule::StageSchedule(int H, double B, std::int64_t n0, std::int64_t n1, double iota,
                             Variant variant)
    : h_(H), b_(B), iota_(iota), n0_(n0), n1_(n1), variant_(variant) {
    if (H < 1) throw std::invalid_argument("StageSchedule: H must be >= 1");
    if (!(B >= 1.0)) throw std::invalid_argument("StageSchedule: B must be >= 1");
    if (n0 < 0 || n1 < 0) throw std::invalid_argument("StageSchedule: N0 and N1 must be non-negative");
    compute_stage_counts();
}

StageSchedule StageSchedule::build(const ScheduleParams& p) {
    if (!(p.discount > 0.0) || !(p.discount < 1.0)) {
        throw std::invalid_argument("build_schedule: discount must lie in (0,1)");
    }
    double vmax = 1.0 / (1.0 - p.discount);
    if (!(p.epsilon > 0.0) || p.epsilon > vmax) {
        throw std::invalid_argument("build_schedule: epsilon must lie in (0, 1/(1-discount)]");
    }
    if (!(p.failure_prob > 0.0) || !(p.failure_prob < 1.0)) {
        throw std::invalid_argument("build_schedule: failure probability must lie in (0,1)");
    }
    if (p.num_states < 1 || p.num_actions < 1) {
        throw std::invalid_argument("build_schedule: state and action counts must be >= 1");
    }
    if (!(p.c1 > 0.0) || !(p.c10 > 0.0)) {
        throw std::invalid_argument("build_schedule: c1 and c10 must be positive");
    }
    const int H = horizon(p.discount, p.epsilon);
    const double hd = static_cast<double>(H);
    const double B = p.variant == Variant::MultiStage ? std::sqrt(hd) : hd * hd * hd;
    const double iota = iota_constant(p.failure_prob);
    const double S = p.num_states;
    const double A = p.num_actions;

    const double n0_formula =
        p.c1 * S * S * S * A * std::pow(hd, 5) * std::log(4.0 * hd * hd * S / p.epsilon) * iota /
        (p.epsilon * p.epsilon);
    std::int64_t n0;
    if (p.cap_n0 && (!std::isfinite(n0_formula) || n0_formula >= 9.2e18)) {
        n0 = *p.cap_n0;
    } else {
        n0 = ceil_to_int64_checked(n0_formula, "build_schedule: N0");
        if (p.cap_n0) n0 = std::min(n0, *p.cap_n0);
    }

    const double n1_formula = p.c10 * S * A * std::pow(hd, 5) * B * std::log(4.0 * hd / p.epsilon) * iota;
    std::int64_t n1;
    if (p.cap_n1 && (!std::isfinite(n1_formula) || n1_formula >= 9.2e18)) {
        n1 = *p.cap_n1;
    } else {
        n1 = ceil_to_int64_checked(n1_formula, "build_schedule: N1");
        if (p.cap_n1) n1 = std::min(n1, *p.cap_n1);
    }

    return StageSchedule(H, B, n0, n1, iota, p.variant);
}

void StageSchedule::compute_stage_counts() {
    // J-check: first j whose type-I partial sum reaches N0 (that stage is
    // truncated to end exactly there). Walk runs of equal d so the count
    // stays logarithmic in N0 even without caps.
    if (n0_ == 0) {
        j_check_ = 0;
    } else {
        std::int64_t cum = 0;
        std::int64_t j_start = 1;
        std::int64_t d = h_;
        std::int64_t prev_floor = 0;
        for (std::int64_t k = 1;; ++k) {
            std::int64_t run_end = b_ == std::floor(b_)
                                       ? k * static_cast<std::int64_t>(b_)
                                       : static_cast<std::int64_t>(std::floor(static_cast<double>(k) * b_));
            std::int64_t run_count = run_end - prev_floor;
            prev_floor = run_end;
            if (run_count > 0) {
                std::int64_t need = (n0_ - cum + d - 1) / d;  // stages of length d to reach N0
                if (need <= run_count) {
                    j_check_ = j_start + need - 1;
                    break;
                }
                cum += run_count * d;
                j_start += run_count;
            }
            d = next_d(d, h_);
        }
    }

    // J-bar: max j such that the type-II partial sum before stage j is <= N0.
    std::int64_t cum = 0;
    std::int64_t d = h_;
    j_bar_ = 1;
    while (d <= n0_ - cum) {
        cum += d;
        d = next_d(d, h_);
        ++j_bar_;
    }
}

std::int64_t StageSchedule::type1_length(std::int64_t j) const {
    if (j < 1) throw std::invalid_argument("type1_length: stage index must be >= 1");
    std::int64_t k = ceil_div_real(j, b_);
    std::int64_t d = h_;
    for (std::int64_t i = 1; i < k; ++i) d = next_d(d, h_);
    return d;
}

std::int64_t StageSchedule::type2_length(std::int64_t j) const {
    if (j < 1) throw std::invalid_argument("type2_length: stage index must be >= 1");
    std::int64_t d = h_;
    for (std::int64_t i = 1; i < j; ++i) d = next_d(d, h_);
    return d;
}

StageIndex StageSchedule::type1_stage_index(std::int64_t n) const {
    if (n < 1 || n > n0_) {
        throw std::invalid_argument("type1_stage_index: n must lie in [1, N0]");
    }
    std::int64_t cum = 0;
    std::int64_t d = h_;
    std::int64_t k = 1;
    for (std::int64_t j = 1;; ++j) {
        std::int64_t kj = ceil_div_real(j, b_);
        while (kj > k) {
            d = next_d(d, h_);
            ++k;
        }
        std::int64_t end = std::min(cum + d, n0_);
        if (n <= end) return {j, n == end};
        cum = end;
    }
}

StageIndex StageSchedule::type2_stage_index(std::int64_t n) const {
    if (n < 1 || n > n0_) {
        throw std::invalid_argument("type2_stage_index: n must lie in [1, N0]");
    }
    std::int64_t cum = 0;
    std::int64_t d = h_;
    for (std::int64_t j = 1;; ++j) {
        std::int64_t end = cum + d;
        if (n <= end) return {j, n == end};
        cum = end;
        d = next_d(d, h_);
    }
}

std::vector<std::int64_t> StageSchedule::d_values(std::int64_t count) const {
    return d_sequence(h_, count);
}

std::vector<std::int64_t> StageSchedule::type1_triggers(std::int64_t count) const {
    std::vector<std::int64_t> out;
    std::int64_t cum = 0;
    std::int64_t d = h_;
    std::int64_t k = 1;
    for (std::int64_t j = 1; static_cast<std::int64_t>(out.size()) < count; ++j) {
        std::int64_t kj = ceil_div_real(j, b_);
        while (kj > k) {
            d = next_d(d, h_);
            ++k;
        }
        std::int64_t end = std::min(cum + d, n0_);
        if (end <= cum) break;  // N0 reached
        out.push_back(end);
        cum = end;
    }
    return out;
}

std::vector<std::int64_t> StageSchedule::type2_triggers(std::int64_t count) const {
    std::vector<std::int64_t> out;
    std::int64_t cum = 0;
    std::int64_t d = h_;
    for (std::int64_t j = 1; j <= j_bar_ && static_cast<std::int64_t>(out.size()) < count; ++j) {
        cum += d;
        out.push_back(cum);
        d = next_d(d, h_);
    }
    return out;
}

StageCursor::StageCursor(const StageSchedule& schedule) : sched_(&schedule) {
    d1_ = schedule.H();
    end1_ = std::min<std::int64_t>(d1_, schedule.N0());
    if (schedule.N0() == 0) end1_ = kNoMoreStages;
    d2_ = schedule.H();
    end2_ = d2_;
}

StageCursor::Boundaries StageCursor::advance() {
    ++n_;
    Boundaries out;
    if (n_ == end1_) {
        out.type1 = true;
        if (end1_ == sched_->N0()) {
            end1_ = kNoMoreStages;
        } else {
            ++j1_;
            std::int64_t k = ceil_div_real(j1_, sched_->B());
            if (k > k1_) {
                d1_ = next_d(d1_, sched_->H());
                k1_ = k;
            }
            end1_ = std::min(end1_ + d1_, sched_->N0());
        }
    }
    if (n_ == end2_) {
        out.type2 = true;
        ++j2_;
        d2_ = next_d(d2_, sched_->H());
        if (end2_ > std::numeric_limits<std::int64_t>::max() - d2_) {
            end2_ = kNoMoreStages;
        } else {
            end2_ += d2_;
        }
    }
    return out;
}

StageCursor::State StageCursor::state() const {
    return {n_, j1_, k1_, d1_, end1_, j2_, d2_, end2_};
}

void StageCursor::restore(const StageSchedule& schedule, const State& s) {
    sched_ = &schedule;
    n_ = s.n;
    j1_ = s.j1;
    k1_ = s.k1;
    d1_ = s.d1;
    end1_ = s.end1;
    j2_ = s.j2;
    d2_ = s.d2;
    end2_ = s.end2;
}

}  // namespace paclab

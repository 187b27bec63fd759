#pragma once

// Univariate quantile estimators: the multiplicative incremental update, its
// order-preserving joint form over several probabilities, the Hyndman-Fan
// Type 8 sample quantile, and step-size schedules.

#include <cstdint>
#include <span>
#include <vector>

namespace tdepth {

/// One incremental quantile estimate.
///
/// The multiplicative update only moves the estimate in the right direction
/// while it is positive, so the update runs on `estimate + offset`. The offset
/// is fixed once (at warm-up) and must keep `estimate + offset > 0`.
struct QuantileState {
    double estimate = 0.0;
    double alpha = 0.5;
    double offset = 0.0;

    double shifted() const { return estimate + offset; }

    /// Throws ParameterError/InputError when alpha is outside (0,1), the estimate
    /// is not finite, or the shifted estimate is not positive.
    void validate() const;
};

/// Single multiplicative update with step `step`:
///   sample above estimate -> shifted estimate *= 1 + step*alpha
///   sample below estimate -> shifted estimate *= 1 - step*(1-alpha)
///   tie                   -> unchanged
QuantileState dumique_update(QuantileState state, double sample, double step);

/// Smallest separation kept between neighbouring estimates after an order repair.
inline constexpr double kDefaultOrderGap = 1e-9;

/// Restores `values` to non-decreasing order after an update crossed two
/// neighbours. Runs pool-adjacent-violators on values[k] - k*gap, which is the
/// least-squares closest sequence with consecutive gaps >= gap. Sequences that
/// are already non-decreasing are left untouched (ties included).
void restore_order(std::span<double> values, double gap = kDefaultOrderGap);

/// Joint estimates for an increasing list of probabilities sharing one offset.
class JointQuantileState {
public:
    JointQuantileState() = default;

    /// All estimates start at `initial`. Throws ParameterError unless alphas are
    /// strictly increasing inside (0,1).
    JointQuantileState(std::vector<double> alphas, double initial, double offset = 0.0);

    /// Explicit per-alpha estimates; must be non-decreasing.
    JointQuantileState(std::vector<double> alphas, std::vector<double> estimates, double offset);

    std::size_t size() const { return states_.size(); }
    const std::vector<QuantileState>& states() const { return states_; }
    const QuantileState& operator[](std::size_t k) const { return states_[k]; }
    double offset() const { return offset_; }
    double order_gap() const { return gap_; }
    void set_order_gap(double gap);

    std::vector<double> alphas() const;
    std::vector<double> estimates() const;

    /// In-place form of joint_update.
    void update(double sample, double step);

private:
    std::vector<QuantileState> states_;
    double offset_ = 0.0;
    double gap_ = kDefaultOrderGap;
};

/// Updates every per-alpha estimate with dumique_update and repairs any
/// ordering violation with restore_order (in shifted coordinates).
JointQuantileState joint_update(JointQuantileState state, double sample, double step);

/// Hyndman-Fan Type 8 sample quantile. Copies and sorts; throws InputError on
/// an empty or non-finite sample and ParameterError for alpha outside (0,1).
double offline_quantile_type8(std::span<const double> samples, double alpha);

/// Type 8 on data already sorted ascending (no checks beyond non-emptiness).
double type8_sorted(std::span<const double> sorted, double alpha);

enum class ScheduleMode { constant, decay, floored_decay };

/// Step sizes: constant lambda, 1/n, or max(1/n, lambda_min).
struct StepSchedule {
    ScheduleMode mode = ScheduleMode::decay;
    double lambda = 0.01;
    double lambda_min = 0.0;
    std::uint64_t n = 1;

    static StepSchedule constant(double lambda);
    static StepSchedule decay();
    static StepSchedule floored_decay(double lambda_min);

    /// Step for the current counter value, without advancing.
    double peek() const;
    /// Returns peek() and advances the counter.
    double next();

    void validate() const;
};

/// Functional form of StepSchedule::next.
struct ScheduledStep {
    double step;
    StepSchedule schedule;
};
ScheduledStep step_schedule_next(StepSchedule schedule);

}  // namespace tdepth

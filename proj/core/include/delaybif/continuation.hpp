#pragma once

// Pseudo-arclength continuation of periodic orbits in the delay, with Floquet
// monitoring, event location and period-doubling branch switching.

#include <optional>
#include <string>
#include <vector>

#include "delaybif/floquet.hpp"
#include "delaybif/periodic.hpp"

namespace delaybif {

enum class EventKind { Fold, PeriodDoubling, NeimarkSacker, HomoclinicApproach };

const char* to_string(EventKind k);

struct BifurcationEvent {
    EventKind kind = EventKind::Fold;
    double tau_at = 0.0;
    double tau_lo = 0.0;  ///< bracket in tau (ordered)
    double tau_hi = 0.0;
    std::size_t after = 0;  ///< index of the branch point preceding the event
    Complex multiplier;     ///< critical multiplier at the refined point
    double period = 0.0;
    double saddle_distance = 0.0;  ///< homoclinic evidence
    double period_slope = 0.0;     ///< dT/dtau at detection, homoclinic evidence
    std::optional<PeriodicOrbit> orbit;  ///< corrected orbit at tau_at (multiplier events)
};

struct BranchPoint {
    PeriodicOrbit orbit;
    std::optional<FloquetSpectrum> floquet;
    double arclength = 0.0;
    double saddle_distance = 0.0;
    int newton_iterations = 0;
};

enum class StopReason { Completed, RangeLeft, MaxSteps, MinStep, Homoclinic, Failure };

const char* to_string(StopReason r);

struct ContinuationBranch {
    std::vector<BranchPoint> points;
    std::vector<BifurcationEvent> events;
    std::optional<HopfPoint> origin;
    StopReason stop = StopReason::Completed;
    std::string stop_detail;
};

/// Search direction in (profile, T, tau) on the orbit's mesh.
struct BranchDirection {
    std::vector<State> du;
    double dT = 0.0;
    double dtau = 0.0;
};

struct ContinuationOptions {
    double initial_step = 0.02;
    double min_step = 1e-6;
    double max_step = 0.25;
    int max_steps = 4000;
    int direction = +1;  ///< initial sense of tau when no direction is supplied
    int min_intervals = 40;
    int max_intervals = 320;
    double defect_tol = 1e-5;   ///< mesh doubled above this off-node residual
    double max_tau_step = 0.05;  ///< cap on |delta tau| per accepted step
    /// HomoclinicApproach when T >= homoclinic_period, |dT/dtau| between
    /// consecutive orbits is at least homoclinic_slope and the orbit passes
    /// within homoclinic_distance of a saddle.
    double homoclinic_period = 0.0;  ///< 0 selects homoclinic_factor * (2 pi / omega_1)
    double homoclinic_factor = 2.0;
    double homoclinic_slope = 1000.0;
    double homoclinic_distance = 0.02;
    bool floquet = true;
    int multipliers = 8;
    bool refine_events = true;
    double event_tau_tol = 1e-3;
    NewtonOptions newton{};
};

/// Continues from a corrected orbit while tau stays in [tau_lo, tau_hi].
ContinuationBranch continue_branch(const PeriodicOrbit& origin, double tau_lo, double tau_hi,
                                   const ContinuationOptions& opts = {},
                                   const std::optional<BranchDirection>& direction = std::nullopt);

/// Events between consecutive branch points, from multiplier crossings of the
/// unit circle, tau reversals and period growth near a saddle.
std::vector<BifurcationEvent> detect_events(const ContinuationBranch& branch, const ContinuationOptions& opts = {});

/// First point of the period-doubled branch at a PeriodDoubling event: the
/// orbit is traversed twice, perturbed along the flip eigenfunction and
/// corrected. Also returns the doubled branch's initial direction.
struct DoubledStart {
    PeriodicOrbit base;  ///< event orbit traversed twice
    PeriodicOrbit first; ///< corrected orbit on the doubled branch
};

DoubledStart switch_period_doubling(const BifurcationEvent& event, const ContinuationOptions& opts = {},
                                    double perturbation = 0.05);

/// Continuation of the doubled branch from a PeriodDoubling event.
ContinuationBranch continue_doubled(const BifurcationEvent& event, double tau_lo, double tau_hi,
                                    const ContinuationOptions& opts = {});

struct CascadeEntry {
    int index = 0;
    double tau_pd = 0.0;
    double period = 0.0;  ///< period of the orbit losing stability at tau_pd
};

struct CascadeResult {
    std::vector<CascadeEntry> entries;
    bool partial = false;
    bool failure = false;  ///< partial because a correction failed, not because the range ran out
    std::string detail;
};

/// Follows the seed branch over [tau_lo, tau_hi] in increasing delay,
/// switching to the doubled branch at each period doubling.
CascadeResult cascade_scan(const PeriodicOrbit& seed, double tau_lo, double tau_hi, int max_doublings,
                           const ContinuationOptions& opts = {});

}  // namespace delaybif

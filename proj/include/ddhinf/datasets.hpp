#pragma once

#include <deque>
#include <optional>
#include <string>
#include <vector>

#include "ddhinf/matrix.hpp"

namespace ddhinf {

/// Discrete-time plant x(k+1) = A x + B u + E w, y = C x + D u + G w with
/// the fixed noise channels E = [I_n, 0] and G = [0, I_p], so w stacks a
/// process part (n entries) and a measurement part (p entries).
struct LtiSystem {
    Mat A;  // n x n
    Mat B;  // n x m
    Mat C;  // p x n
    Mat D;  // p x m

    LtiSystem() = default;
    LtiSystem(Mat A_, Mat B_, Mat C_, Mat D_);

    int n() const { return A.rows(); }
    int m() const { return B.cols(); }
    int p() const { return C.rows(); }
    int r() const { return n() + p(); }

    Mat E() const;         // [I_n, 0_{n x p}]
    Mat G() const;         // [0_{p x n}, I_p]
    Mat noise_gain() const;  // [E; G], identity of size n+p by construction
    /// Stacked unknown-system matrix [A B; C D], (n+p) x (n+m).
    Mat stacked() const;
};

struct DisturbanceBound {
    SymMat Upsilon;  // r x r, positive definite

    explicit DisturbanceBound(SymMat u);
    int r() const { return Upsilon.dim(); }
};

struct Trajectory {
    std::vector<std::vector<double>> u;  // T entries of size m
    std::vector<std::vector<double>> x;  // T+1 entries of size n
    std::vector<std::vector<double>> y;  // T entries of size p
    std::optional<std::vector<std::vector<double>>> w;  // T entries of size r (simulation only)

    int length() const { return static_cast<int>(u.size()); }
    void validate() const;  // throws MalformedTrajectory
    /// Largest dynamics residual max_k |x(k+1) - A x - B u - E w| over the
    /// trajectory; requires w.
    double dynamics_residual(const LtiSystem& sys) const;
};

struct DataMatrices {
    Mat U;      // m x T
    Mat X;      // n x T
    Mat Xplus;  // n x T
    Mat Y;      // p x T

    int T() const { return U.cols(); }
};

enum class QmiProvenance { OfflineIndex, OnlineTime };

/// Symmetric data-consistency block N of dimension (n+p) + (n+m): the set of
/// systems Z with [I, Z] N [I, Z]^T <= 0 is exactly the set compatible with
/// the recorded data under the disturbance bound.
struct QmiBlock {
    SymMat N;
    int T = 0;
    QmiProvenance provenance = QmiProvenance::OfflineIndex;
    int index = 0;  // dataset index or time step

    int dim() const { return N.dim(); }
};

DataMatrices build_data_matrices(const Trajectory& traj);

QmiBlock build_qmi(const DataMatrices& dm, const DisturbanceBound& bound);

/// lambda_max([I, Z] N [I, Z]^T); Z belongs to the consistency set iff the
/// value is <= 0 (up to tolerance).
double membership(const QmiBlock& qmi, const Mat& Z);

/// Quadratic form q(a, b) = |Xplus - a X - b U|^2 - bound^2 T describing the
/// scalar-system consistency set {q <= 0} in the (a, b) plane.
struct ConicSection {
    double c0 = 0, ca = 0, cb = 0, caa = 0, cab = 0, cbb = 0;

    double evaluate(double a, double b) const;
    /// Center and level of the equivalent centered form; valid when bounded.
    bool bounded() const;
    std::optional<double> area() const;
    std::pair<double, double> center() const;
    /// Points on the boundary ellipse (empty when unbounded).
    std::vector<std::pair<double, double>> boundary_points(int count) const;
};

ConicSection scalar_consistency_set(const std::vector<double>& u_seq, const std::vector<double>& x_seq,
                                    int T, double bound);

/// The printed scalar-example data: 9 inputs and 10 states.
const std::vector<double>& scalar_example_inputs();
const std::vector<double>& scalar_example_states();

/// Rolling input-state-output history for the online controller. Absolute
/// time starts at -L (the pre-collected block) and the window at time k uses
/// inputs/outputs k-L..k-1 and states k-L..k. Single writer; reads must not
/// overlap a push.
class OnlineHistory {
public:
    OnlineHistory(int n, int m, int p) : n_(n), m_(m), p_(p) {}

    /// Seed with the pre-collected trajectory; its final state becomes the
    /// state at time 0.
    void seed(const Trajectory& pre);
    /// Record one closed-loop step: u(k), y(k) measured at time k and the
    /// successor state x(k+1).
    void push(const std::vector<double>& u_k, const std::vector<double>& y_k,
              const std::vector<double>& x_next);

    /// Data matrices for the window of length L ending at time k.
    DataMatrices window(int k, int L) const;
    int earliest_time() const { return start_time_; }
    int latest_state_time() const { return start_time_ + static_cast<int>(x_.size()) - 1; }
    const std::vector<double>& state_at(int k) const;

private:
    int n_, m_, p_;
    int start_time_ = 0;
    std::deque<std::vector<double>> u_, y_;
    std::deque<std::vector<double>> x_;
};

// --- trajectory CSV schema -------------------------------------------------
// header: k,u1..um,x1..xn,y1..yp[,w1..wr]; one row per step, final row holds
// x(T) with empty u/y/w fields.

std::string trajectory_to_csv(const Trajectory& traj, int n, int m, int p);
Trajectory trajectory_from_csv(const std::string& text);
void write_trajectory_csv(const std::string& path, const Trajectory& traj, int n, int m, int p);
Trajectory read_trajectory_csv(const std::string& path);

/// Canonical shortest-roundtrip double formatting used by all file emitters.
std::string format_double(double v);

}  // namespace ddhinf

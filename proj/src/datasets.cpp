#include "ddhinf/datasets.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ddhinf/spectral.hpp"

namespace ddhinf {

LtiSystem::LtiSystem(Mat A_, Mat B_, Mat C_, Mat D_)
    : A(std::move(A_)), B(std::move(B_)), C(std::move(C_)), D(std::move(D_)) {
    if (!A.square()) throw DimensionMismatch("A must be square");
    if (B.rows() != A.rows()) throw DimensionMismatch("B row count must match A");
    if (C.cols() != A.rows()) throw DimensionMismatch("C column count must match A");
    if (D.rows() != C.rows() || D.cols() != B.cols()) throw DimensionMismatch("D shape mismatch");
}

Mat LtiSystem::E() const {
    Mat e(n(), r());
    for (int i = 0; i < n(); ++i) e(i, i) = 1.0;
    return e;
}

Mat LtiSystem::G() const {
    Mat g(p(), r());
    for (int i = 0; i < p(); ++i) g(i, n() + i) = 1.0;
    return g;
}

Mat LtiSystem::noise_gain() const {
    Mat s(n() + p(), r());
    s.set_block(0, 0, E());
    s.set_block(n(), 0, G());
    return s;
}

Mat LtiSystem::stacked() const {
    Mat z(n() + p(), n() + m());
    z.set_block(0, 0, A);
    z.set_block(0, n(), B);
    z.set_block(n(), 0, C);
    z.set_block(n(), n(), D);
    return z;
}

DisturbanceBound::DisturbanceBound(SymMat u) : Upsilon(std::move(u)) {
    if (min_eigenvalue(Upsilon) <= 0.0) throw InvalidMatrix("disturbance bound must be positive definite");
}

void Trajectory::validate() const {
    const int T = static_cast<int>(u.size());
    if (T < 1) throw MalformedTrajectory("trajectory needs at least one step");
    if (static_cast<int>(x.size()) != T + 1) throw MalformedTrajectory("state sequence must have length T+1");
    if (static_cast<int>(y.size()) != T) throw MalformedTrajectory("output sequence must have length T");
    if (w && static_cast<int>(w->size()) != T) throw MalformedTrajectory("disturbance sequence must have length T");
    const std::size_t m = u.front().size();
    const std::size_t n = x.front().size();
    const std::size_t p = y.front().size();
    for (const auto& v : u)
        if (v.size() != m) throw MalformedTrajectory("ragged input rows");
    for (const auto& v : x)
        if (v.size() != n) throw MalformedTrajectory("ragged state rows");
    for (const auto& v : y)
        if (v.size() != p) throw MalformedTrajectory("ragged output rows");
    if (w) {
        const std::size_t r = w->front().size();
        for (const auto& v : *w)
            if (v.size() != r) throw MalformedTrajectory("ragged disturbance rows");
    }
}

double Trajectory::dynamics_residual(const LtiSystem& sys) const {
    validate();
    if (!w) throw MalformedTrajectory("dynamics residual needs the disturbance record");
    double worst = 0.0;
    for (int k = 0; k < length(); ++k) {
        const Mat xk = Mat::col_vec(x[static_cast<std::size_t>(k)]);
        const Mat uk = Mat::col_vec(u[static_cast<std::size_t>(k)]);
        const Mat wk = Mat::col_vec((*w)[static_cast<std::size_t>(k)]);
        const Mat pred = sys.A * xk + sys.B * uk + sys.E() * wk;
        for (int i = 0; i < sys.n(); ++i)
            worst = std::max(worst, std::fabs(pred(i, 0) - x[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(i)]));
    }
    return worst;
}

DataMatrices build_data_matrices(const Trajectory& traj) {
    traj.validate();
    const int T = traj.length();
    const int m = static_cast<int>(traj.u.front().size());
    const int n = static_cast<int>(traj.x.front().size());
    const int p = static_cast<int>(traj.y.front().size());
    DataMatrices dm{Mat(m, T), Mat(n, T), Mat(n, T), Mat(p, T)};
    for (int k = 0; k < T; ++k) {
        for (int i = 0; i < m; ++i) dm.U(i, k) = traj.u[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i) dm.X(i, k) = traj.x[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
        for (int i = 0; i < n; ++i) dm.Xplus(i, k) = traj.x[static_cast<std::size_t>(k + 1)][static_cast<std::size_t>(i)];
        for (int i = 0; i < p; ++i) dm.Y(i, k) = traj.y[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
    }
    return dm;
}

QmiBlock build_qmi(const DataMatrices& dm, const DisturbanceBound& bound) {
    const int n = dm.X.rows();
    const int m = dm.U.rows();
    const int p = dm.Y.rows();
    const int T = dm.T();
    if (dm.Xplus.rows() != n || dm.Xplus.cols() != T || dm.Y.cols() != T || dm.X.cols() != T)
        throw DimensionMismatch("inconsistent data matrices");
    if (bound.r() != n + p) throw DimensionMismatch("disturbance bound dimension must be n+p");

    const int dim = (n + p) + (n + m);
    Mat h(dim, T);
    h.set_block(0, 0, dm.Xplus);
    h.set_block(n, 0, dm.Y);
    h.set_block(n + p, 0, -1.0 * dm.X);
    h.set_block(2 * n + p, 0, -1.0 * dm.U);

    // [E; G] is the identity on the stacked noise channel by the model
    // structure; kept explicit so the formula survives any layout change.
    Mat gain(n + p, n + p);
    for (int i = 0; i < n + p; ++i) gain(i, i) = 1.0;
    const Mat scaled_bound = gain * (static_cast<double>(T) * bound.Upsilon.mat()) * gain.transpose();

    Mat nmat = h * h.transpose();
    nmat.add_block(0, 0, scaled_bound, -1.0);

    QmiBlock q;
    q.N = SymMat::symmetrize(nmat);
    q.T = T;
    return q;
}

double membership(const QmiBlock& qmi, const Mat& Z) {
    const int d = qmi.dim();
    const int l = Z.rows();
    const int s = Z.cols();
    if (l + s != d) throw DimensionMismatch("membership: Z shape incompatible with the block");
    Mat iz(l, d);
    for (int i = 0; i < l; ++i) iz(i, i) = 1.0;
    iz.set_block(0, l, Z);
    return max_eigenvalue(SymMat::symmetrize(iz * qmi.N.mat() * iz.transpose()));
}

double ConicSection::evaluate(double a, double b) const {
    return c0 + ca * a + cb * b + caa * a * a + cab * a * b + cbb * b * b;
}

bool ConicSection::bounded() const {
    const double det = caa * cbb - 0.25 * cab * cab;
    return caa > 0.0 && det > 0.0;
}

std::pair<double, double> ConicSection::center() const {
    // Stationary point of the quadratic form: 2 Q v = -[ca; cb].
    const Mat q{{2.0 * caa, cab}, {cab, 2.0 * cbb}};
    const Mat rhs{{-ca}, {-cb}};
    const Mat v = lu_solve(q, rhs);
    return {v(0, 0), v(1, 0)};
}

std::optional<double> ConicSection::area() const {
    if (!bounded()) return std::nullopt;
    const auto [a0, b0] = center();
    const double level = -evaluate(a0, b0);  // (v-v0)^T Q (v-v0) <= level
    if (level <= 0.0) return 0.0;            // empty or single point
    const double det = caa * cbb - 0.25 * cab * cab;
    return 3.14159265358979323846 * level / std::sqrt(det);
}

std::vector<std::pair<double, double>> ConicSection::boundary_points(int count) const {
    std::vector<std::pair<double, double>> pts;
    if (!bounded()) return pts;
    const auto [a0, b0] = center();
    const double level = -evaluate(a0, b0);
    if (level <= 0.0) return pts;
    const Mat q{{caa, 0.5 * cab}, {0.5 * cab, cbb}};
    const EigenSym es = eigen_sym(SymMat(q));
    pts.reserve(static_cast<std::size_t>(count));
    for (int i = 0; i < count; ++i) {
        const double th = 2.0 * 3.14159265358979323846 * i / count;
        const double r1 = std::sqrt(level / es.values[0]) * std::cos(th);
        const double r2 = std::sqrt(level / es.values[1]) * std::sin(th);
        const double da = es.vectors(0, 0) * r1 + es.vectors(0, 1) * r2;
        const double db = es.vectors(1, 0) * r1 + es.vectors(1, 1) * r2;
        pts.emplace_back(a0 + da, b0 + db);
    }
    return pts;
}

ConicSection scalar_consistency_set(const std::vector<double>& u_seq, const std::vector<double>& x_seq,
                                    int T, double bound) {
    if (T < 1 || T > static_cast<int>(u_seq.size()) || T + 1 > static_cast<int>(x_seq.size()))
        throw MalformedTrajectory("scalar consistency set: T out of range");
    if (bound <= 0.0) throw InvalidMatrix("scalar consistency set: bound must be positive");
    double sxx = 0, suu = 0, sxu = 0, spx = 0, spu = 0, spp = 0;
    for (int k = 0; k < T; ++k) {
        const double xk = x_seq[static_cast<std::size_t>(k)];
        const double uk = u_seq[static_cast<std::size_t>(k)];
        const double xp = x_seq[static_cast<std::size_t>(k + 1)];
        sxx += xk * xk;
        suu += uk * uk;
        sxu += xk * uk;
        spx += xp * xk;
        spu += xp * uk;
        spp += xp * xp;
    }
    if (sxx == 0.0 && suu == 0.0) throw DegenerateSet("scalar consistency set: no excitation in the data");
    ConicSection c;
    c.c0 = spp - bound * bound * T;
    c.ca = -2.0 * spx;
    c.cb = -2.0 * spu;
    c.caa = sxx;
    c.cab = 2.0 * sxu;
    c.cbb = suu;
    return c;
}

const std::vector<double>& scalar_example_inputs() {
    static const std::vector<double> u = {0.62, 0.81, -0.74, 0.82, 0.26, -0.80, -0.44, 0.09, 0.91};
    return u;
}

const std::vector<double>& scalar_example_states() {
    static const std::vector<double> x = {0.1, 1.14, 1.36, 0.23, 0.58, 0.48, -0.15, -0.23, 0.44, 1.29};
    return x;
}

void OnlineHistory::seed(const Trajectory& pre) {
    pre.validate();
    if (static_cast<int>(pre.u.front().size()) != m_ || static_cast<int>(pre.x.front().size()) != n_ ||
        static_cast<int>(pre.y.front().size()) != p_)
        throw DimensionMismatch("online history: seed dimensions mismatch");
    u_.assign(pre.u.begin(), pre.u.end());
    y_.assign(pre.y.begin(), pre.y.end());
    x_.assign(pre.x.begin(), pre.x.end());
    start_time_ = -pre.length();
}

void OnlineHistory::push(const std::vector<double>& u_k, const std::vector<double>& y_k,
                         const std::vector<double>& x_next) {
    if (static_cast<int>(u_k.size()) != m_ || static_cast<int>(y_k.size()) != p_ ||
        static_cast<int>(x_next.size()) != n_)
        throw DimensionMismatch("online history: push dimensions mismatch");
    u_.push_back(u_k);
    y_.push_back(y_k);
    x_.push_back(x_next);
}

const std::vector<double>& OnlineHistory::state_at(int k) const {
    const int idx = k - start_time_;
    if (idx < 0 || idx >= static_cast<int>(x_.size())) throw WindowUnderflow("state index out of history");
    return x_[static_cast<std::size_t>(idx)];
}

DataMatrices OnlineHistory::window(int k, int L) const {
    if (L < 1) throw WindowUnderflow("window length must be >= 1");
    const int first = k - L;  // first input/output index used
    if (first < start_time_ || k > latest_state_time())
        throw WindowUnderflow("insufficient history for the requested window");
    DataMatrices dm{Mat(m_, L), Mat(n_, L), Mat(n_, L), Mat(p_, L)};
    for (int j = 0; j < L; ++j) {
        const int t = first + j;
        const auto& ut = u_[static_cast<std::size_t>(t - start_time_)];
        const auto& yt = y_[static_cast<std::size_t>(t - start_time_)];
        const auto& xt = x_[static_cast<std::size_t>(t - start_time_)];
        const auto& xn = x_[static_cast<std::size_t>(t - start_time_ + 1)];
        for (int i = 0; i < m_; ++i) dm.U(i, j) = ut[static_cast<std::size_t>(i)];
        for (int i = 0; i < p_; ++i) dm.Y(i, j) = yt[static_cast<std::size_t>(i)];
        for (int i = 0; i < n_; ++i) dm.X(i, j) = xt[static_cast<std::size_t>(i)];
        for (int i = 0; i < n_; ++i) dm.Xplus(i, j) = xn[static_cast<std::size_t>(i)];
    }
    return dm;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string trajectory_to_csv(const Trajectory& traj, int n, int m, int p) {
    traj.validate();
    const int T = traj.length();
    const bool has_w = traj.w.has_value();
    const int r = has_w ? static_cast<int>(traj.w->front().size()) : 0;
    std::ostringstream os;
    os << "k";
    for (int i = 1; i <= m; ++i) os << ",u" << i;
    for (int i = 1; i <= n; ++i) os << ",x" << i;
    for (int i = 1; i <= p; ++i) os << ",y" << i;
    for (int i = 1; i <= r; ++i) os << ",w" << i;
    os << "\n";
    for (int k = 0; k <= T; ++k) {
        os << k;
        const bool terminal = (k == T);
        for (int i = 0; i < m; ++i) {
            os << ",";
            if (!terminal) os << format_double(traj.u[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < n; ++i)
            os << "," << format_double(traj.x[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
        for (int i = 0; i < p; ++i) {
            os << ",";
            if (!terminal) os << format_double(traj.y[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
        }
        for (int i = 0; i < r; ++i) {
            os << ",";
            if (!terminal) os << format_double((*traj.w)[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)]);
        }
        os << "\n";
    }
    return os.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

}  // namespace

Trajectory trajectory_from_csv(const std::string& text) {
    std::istringstream is(text);
    std::string line;
    if (!std::getline(is, line)) throw MalformedTrajectory("empty trajectory file");
    const auto header = split_csv_line(line);
    int m = 0, n = 0, p = 0, r = 0;
    for (const auto& h : header) {
        if (h.empty()) continue;
        if (h[0] == 'u') ++m;
        else if (h[0] == 'x') ++n;
        else if (h[0] == 'y') ++p;
        else if (h[0] == 'w') ++r;
    }
    if (n == 0) throw MalformedTrajectory("trajectory header declares no states");

    Trajectory traj;
    if (r > 0) traj.w.emplace();
    std::vector<std::vector<std::string>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.size() < 2) throw MalformedTrajectory("trajectory needs at least one step");
    for (std::size_t idx = 0; idx < rows.size(); ++idx) {
        const auto& f = rows[idx];
        if (static_cast<int>(f.size()) != 1 + m + n + p + r)
            throw MalformedTrajectory("trajectory row has wrong field count");
        const bool terminal = (idx + 1 == rows.size());
        auto grab = [&](int offset, int count) {
            std::vector<double> v(static_cast<std::size_t>(count));
            for (int i = 0; i < count; ++i) {
                const std::string& s = f[static_cast<std::size_t>(1 + offset + i)];
                if (s.empty()) throw MalformedTrajectory("missing value in trajectory row");
                v[static_cast<std::size_t>(i)] = std::stod(s);
            }
            return v;
        };
        traj.x.push_back(grab(m, n));
        if (!terminal) {
            traj.u.push_back(grab(0, m));
            traj.y.push_back(grab(m + n, p));
            if (r > 0) traj.w->push_back(grab(m + n + p, r));
        }
    }
    traj.validate();
    return traj;
}

void write_trajectory_csv(const std::string& path, const Trajectory& traj, int n, int m, int p) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw Error("cannot open " + path + " for writing");
    os << trajectory_to_csv(traj, n, m, p);
}

Trajectory read_trajectory_csv(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw Error("cannot open " + path);
    std::ostringstream buf;
    buf << is.rdbuf();
    return trajectory_from_csv(buf.str());
}

}  // namespace ddhinf

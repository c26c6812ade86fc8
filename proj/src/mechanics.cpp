#include "taperfold/mechanics.hpp"

#include <cmath>
#include <limits>

namespace taperfold {

namespace {

// ---------------------------------------------------------------------
// Rotation through a total rotation vector:
//   R(w) p = p + a(s) (w x p) + b(s) (w x (w x p)),  s = |w|^2,
// with a = sin(T)/T, b = (1 - cos(T))/T^2, T = |w|. Both coefficients are
// analytic in s; the series branch keeps all derivatives smooth at w = 0.
// ---------------------------------------------------------------------

struct RotCoeffs {
    double a, b, da, db, dda, ddb;  // value and d/ds, d2/ds2
};

RotCoeffs rot_coeffs(double s) {
    RotCoeffs c;
    if (s < 1e-4) {
        c.a = 1.0 - s / 6.0 + s * s / 120.0 - s * s * s / 5040.0;
        c.da = -1.0 / 6.0 + s / 60.0 - s * s / 1680.0 + s * s * s / 90720.0;
        c.dda = 1.0 / 60.0 - s / 840.0 + s * s / 30240.0;
        c.b = 0.5 - s / 24.0 + s * s / 720.0 - s * s * s / 40320.0;
        c.db = -1.0 / 24.0 + s / 360.0 - s * s / 13440.0 + s * s * s / 907200.0;
        c.ddb = 1.0 / 360.0 - s / 6720.0 + s * s / 302400.0;
    } else {
        const double T = std::sqrt(s);
        c.a = std::sin(T) / T;
        c.b = (1.0 - std::cos(T)) / s;
        c.da = (std::cos(T) - c.a) / (2.0 * s);
        c.db = (0.5 * c.a - c.b) / s;
        c.dda = -(0.5 * c.a + 3.0 * c.da) / (2.0 * s);
        c.ddb = (0.5 * c.da - 2.0 * c.db) / s;
    }
    return c;
}

Vec3 rotate_rodrigues(const Vec3& w, const Vec3& p) {
    const RotCoeffs k = rot_coeffs(w.squaredNorm());
    const Vec3 c = w.cross(p);
    return p + k.a * c + k.b * w.cross(c);
}

// d(R(w) p)/dw, column m = 2 a' w_m (w x p) + a (e_m x p)
//                        + 2 b' w_m (w x (w x p)) + b J_d[m].
Eigen::Matrix3d rotate_jacobian(const Vec3& w, const Vec3& p) {
    const RotCoeffs k = rot_coeffs(w.squaredNorm());
    const Vec3 c = w.cross(p);
    const Vec3 d = w.cross(c);
    const double wp = w.dot(p);
    Eigen::Matrix3d J;
    for (int m = 0; m < 3; ++m) {
        Vec3 em = Vec3::Zero();
        em[m] = 1.0;
        const Vec3 Jc = em.cross(p);
        const Vec3 Jd = p[m] * w + wp * em - 2.0 * w[m] * p;
        J.col(m) = 2.0 * k.da * w[m] * c + k.a * Jc + 2.0 * k.db * w[m] * d + k.b * Jd;
    }
    return J;
}

// f . d2(R(w) p)/dw2 — the geometric stiffness of a rigid lever under a
// nodal force f. Symmetric by construction.
Eigen::Matrix3d rotate_curvature(const Vec3& w, const Vec3& p, const Vec3& f) {
    const RotCoeffs k = rot_coeffs(w.squaredNorm());
    const Vec3 c = w.cross(p);
    const Vec3 d = w.cross(c);
    const double wp = w.dot(p);
    const double fc = f.dot(c);
    const double fd = f.dot(d);
    const double fp = f.dot(p);

    std::array<double, 3> fJc{}, fJd{};
    for (int m = 0; m < 3; ++m) {
        Vec3 em = Vec3::Zero();
        em[m] = 1.0;
        fJc[m] = f.dot(em.cross(p));
        fJd[m] = f.dot(p[m] * w + wp * em - 2.0 * w[m] * p);
    }

    Eigen::Matrix3d S;
    for (int m = 0; m < 3; ++m) {
        for (int l = 0; l < 3; ++l) {
            double v = 4.0 * k.dda * w[m] * w[l] * fc +
                       2.0 * k.da * (w[m] * fJc[l] + w[l] * fJc[m]) +
                       4.0 * k.ddb * w[m] * w[l] * fd +
                       2.0 * k.db * (w[m] * fJd[l] + w[l] * fJd[m]) +
                       k.b * (p[m] * f[l] + p[l] * f[m]);
            if (m == l) v += 2.0 * k.da * fc + 2.0 * k.db * fd - 2.0 * k.b * fp;
            S(m, l) = v;
        }
    }
    return S;
}

// ---------------------------------------------------------------------
// Forward-mode dual numbers over the 12 hinge coordinates. The hinge
// Hessian is the exact derivative of the hand-written gradient, so no
// finite differencing enters the tangent.
// ---------------------------------------------------------------------

struct D12 {
    double v = 0.0;
    std::array<double, 12> d{};
    D12() = default;
    D12(double val) : v(val) {}  // NOLINT: implicit constant lift
};

inline D12 operator+(const D12& a, const D12& b) {
    D12 r(a.v + b.v);
    for (int i = 0; i < 12; ++i) r.d[i] = a.d[i] + b.d[i];
    return r;
}
inline D12 operator-(const D12& a, const D12& b) {
    D12 r(a.v - b.v);
    for (int i = 0; i < 12; ++i) r.d[i] = a.d[i] - b.d[i];
    return r;
}
inline D12 operator-(const D12& a) {
    D12 r(-a.v);
    for (int i = 0; i < 12; ++i) r.d[i] = -a.d[i];
    return r;
}
inline D12 operator*(const D12& a, const D12& b) {
    D12 r(a.v * b.v);
    for (int i = 0; i < 12; ++i) r.d[i] = a.v * b.d[i] + b.v * a.d[i];
    return r;
}
inline D12 operator/(const D12& a, const D12& b) {
    D12 r(a.v / b.v);
    for (int i = 0; i < 12; ++i) r.d[i] = (a.d[i] - r.v * b.d[i]) / b.v;
    return r;
}
inline D12 sqrt(const D12& a) {
    D12 r(std::sqrt(a.v));
    const double inv = 0.5 / r.v;
    for (int i = 0; i < 12; ++i) r.d[i] = a.d[i] * inv;
    return r;
}
using std::sqrt;

template <class S>
struct TV3 {
    S x, y, z;
};
template <class S>
TV3<S> operator-(const TV3<S>& a, const TV3<S>& b) {
    return {a.x - b.x, a.y - b.y, a.z - b.z};
}
template <class S>
TV3<S> operator*(const S& c, const TV3<S>& a) {
    return {c * a.x, c * a.y, c * a.z};
}
template <class S>
TV3<S> operator+(const TV3<S>& a, const TV3<S>& b) {
    return {a.x + b.x, a.y + b.y, a.z + b.z};
}
template <class S>
S dot(const TV3<S>& a, const TV3<S>& b) {
    return a.x * b.x + a.y * b.y + a.z * b.z;
}
template <class S>
TV3<S> cross(const TV3<S>& a, const TV3<S>& b) {
    return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

// Gradient of the dihedral angle about edge j->k with wings a, b,
// ordered (a, j, k, b). Wing gradients act along the face normals; the
// edge-node gradients balance them through the edge projections.
template <class S>
std::array<S, 12> dihedral_gradient_T(const TV3<S>& xa, const TV3<S>& xj,
                                      const TV3<S>& xk, const TV3<S>& xb) {
    const TV3<S> e = xk - xj;
    const S L2 = dot(e, e);
    const S L = sqrt(L2);
    const TV3<S> va = xa - xj;
    const TV3<S> vb = xb - xj;
    const TV3<S> n1 = cross(e, va);
    const TV3<S> n2 = cross(vb, e);
    const S c1 = L / dot(n1, n1);
    const S c2 = L / dot(n2, n2);
    const S ta = dot(va, e) / L2;
    const S tb = dot(vb, e) / L2;

    const TV3<S> ga = (-c1) * n1;
    const TV3<S> gb = (-c2) * n2;
    const TV3<S> gj = ((S(1.0) - ta) * c1) * n1 + ((S(1.0) - tb) * c2) * n2;
    const TV3<S> gk = (ta * c1) * n1 + (tb * c2) * n2;

    return {ga.x, ga.y, ga.z, gj.x, gj.y, gj.z, gk.x, gk.y, gk.z, gb.x, gb.y, gb.z};
}

void hinge_gradient(const std::array<Vec3, 4>& x, Eigen::Matrix<double, 12, 1>& g) {
    TV3<double> p[4];
    for (int n = 0; n < 4; ++n) p[n] = {x[n].x(), x[n].y(), x[n].z()};
    const auto arr = dihedral_gradient_T<double>(p[0], p[1], p[2], p[3]);
    for (int i = 0; i < 12; ++i) g[i] = arr[i];
}

void hinge_hessian(const std::array<Vec3, 4>& x, Eigen::Matrix<double, 12, 12>& H) {
    TV3<D12> p[4];
    for (int n = 0; n < 4; ++n) {
        D12 cx(x[n].x()), cy(x[n].y()), cz(x[n].z());
        cx.d[3 * n + 0] = 1.0;
        cy.d[3 * n + 1] = 1.0;
        cz.d[3 * n + 2] = 1.0;
        p[n] = {cx, cy, cz};
    }
    const auto arr = dihedral_gradient_T<D12>(p[0], p[1], p[2], p[3]);
    for (int r = 0; r < 12; ++r) {
        for (int c = 0; c < 12; ++c) H(r, c) = arr[r].d[c];
    }
    H = 0.5 * (H + H.transpose()).eval();
}

}  // namespace

// ---------------------------------------------------------------------
// DofMap
// ---------------------------------------------------------------------

DofMap::DofMap(const BarHingeModel& model, const ConstraintSet& cs) : model_(&model) {
    const int N = static_cast<int>(model.nodes.size());
    node_dof_.assign(N, -1);
    node_frame_.assign(N, -1);

    if (!cs.all_nodes_free) {
        for (const RigidGroup& g : model.groups) {
            Frame f;
            f.name = g.name;
            f.ref = g.ref_point;
            f.nodes = g.nodes;
            const int fi = static_cast<int>(frames_.size());
            for (int idx : g.nodes) node_frame_[idx] = fi;
            frames_.push_back(std::move(f));
        }
    }

    nfree_ = 0;
    for (int n = 0; n < N; ++n) {
        if (node_frame_[n] < 0) {
            node_dof_[n] = nfree_;
            nfree_ += 3;
        }
    }

    for (int fi = 0; fi < static_cast<int>(frames_.size()); ++fi) {
        Frame& f = frames_[fi];
        FrameConstraint fc;
        if (auto it = cs.frames.find(f.name); it != cs.frames.end()) fc = it->second;

        for (int m = 0; m < 6; ++m) {
            const bool is_driven = cs.driven && cs.driven->group == f.name && cs.driven->dof == m;
            if (is_driven) {
                f.qidx[m] = -2;
                driven_frame_ = fi;
                driven_dof_ = m;
                continue;
            }
            if (fc.dof[m]) {
                f.qidx[m] = -1;
                f.value[m] = *fc.dof[m];
                continue;
            }
            if (m >= 3) {
                // Rotation with no lever grip is a gauge direction: every
                // group node lies on this axis through the reference point.
                double grip = 0.0, scale = 0.0;
                Vec3 axis = Vec3::Zero();
                axis[m - 3] = 1.0;
                for (int idx : f.nodes) {
                    const Vec3 r = model.nodes[idx] - f.ref;
                    grip += axis.cross(r).squaredNorm();
                    scale += r.squaredNorm();
                }
                if (grip <= 1e-12 * std::max(scale, 1e-30)) {
                    f.qidx[m] = -1;
                    f.value[m] = 0.0;
                    gauge_fixed_.emplace_back(f.name, m);
                    continue;
                }
            }
            f.qidx[m] = nfree_++;
        }
    }
}

bool DofMap::fully_free() const { return frames_.empty() && driven_frame_ < 0; }

void DofMap::frame_coords(const Frame& f, const VecX& q, double driven_value,
                          Vec3& t, Vec3& w) const {
    double vals[6];
    for (int m = 0; m < 6; ++m) {
        if (f.qidx[m] >= 0) vals[m] = q[f.qidx[m]];
        else if (f.qidx[m] == -2) vals[m] = driven_value;
        else vals[m] = f.value[m];
    }
    t = Vec3(vals[0], vals[1], vals[2]);
    w = Vec3(vals[3], vals[4], vals[5]);
}

std::vector<Vec3> DofMap::positions(const VecX& q, double driven_value) const {
    const auto& nodes = model_->nodes;
    std::vector<Vec3> x(nodes.size());
    for (size_t n = 0; n < nodes.size(); ++n) {
        if (node_dof_[n] >= 0) {
            x[n] = nodes[n] + q.segment<3>(node_dof_[n]);
        }
    }
    for (const Frame& f : frames_) {
        Vec3 t, w;
        frame_coords(f, q, driven_value, t, w);
        for (int idx : f.nodes) {
            x[idx] = f.ref + t + rotate_rodrigues(w, model_->nodes[idx] - f.ref);
        }
    }
    return x;
}

MatX DofMap::jacobian(const VecX& q, double driven_value) const {
    const int N = static_cast<int>(model_->nodes.size());
    MatX J = MatX::Zero(3 * N, nfree_ + 1);
    for (int n = 0; n < N; ++n) {
        if (node_dof_[n] >= 0) {
            for (int r = 0; r < 3; ++r) J(3 * n + r, node_dof_[n] + r) = 1.0;
        }
    }
    for (const Frame& f : frames_) {
        Vec3 t, w;
        frame_coords(f, q, driven_value, t, w);
        for (int idx : f.nodes) {
            const Vec3 lever = model_->nodes[idx] - f.ref;
            const Eigen::Matrix3d JR = rotate_jacobian(w, lever);
            for (int m = 0; m < 6; ++m) {
                int col = f.qidx[m];
                if (col == -1) continue;
                if (col == -2) col = nfree_;
                if (m < 3) {
                    J(3 * idx + m, col) += 1.0;
                } else {
                    for (int r = 0; r < 3; ++r) J(3 * idx + r, col) += JR(r, m - 3);
                }
            }
        }
    }
    return J;
}

void DofMap::add_rotation_curvature(const VecX& q, double driven_value,
                                    const VecX& nodal_gradient, MatX& tangent_aug) const {
    for (const Frame& f : frames_) {
        const bool any_rot =
            f.qidx[3] != -1 || f.qidx[4] != -1 || f.qidx[5] != -1;
        if (!any_rot) continue;
        Vec3 t, w;
        frame_coords(f, q, driven_value, t, w);
        Eigen::Matrix3d S = Eigen::Matrix3d::Zero();
        for (int idx : f.nodes) {
            const Vec3 lever = model_->nodes[idx] - f.ref;
            const Vec3 fn = nodal_gradient.segment<3>(3 * idx);
            S += rotate_curvature(w, lever, fn);
        }
        for (int m = 0; m < 3; ++m) {
            int rm = f.qidx[3 + m];
            if (rm == -1) continue;
            if (rm == -2) rm = nfree_;
            for (int l = 0; l < 3; ++l) {
                int rl = f.qidx[3 + l];
                if (rl == -1) continue;
                if (rl == -2) rl = nfree_;
                tangent_aug(rm, rl) += S(m, l);
            }
        }
    }
}

DofMap::FrameState DofMap::frame_state(const VecX& q, double driven_value,
                                       const std::string& group) const {
    for (const Frame& f : frames_) {
        if (f.name == group) {
            FrameState st;
            frame_coords(f, q, driven_value, st.t, st.w);
            return st;
        }
    }
    throw Error("no rigid group named '" + group + "'");
}

MatX DofMap::rigid_basis() const {
    if (!fully_free()) return MatX(0, 0);
    const int N = static_cast<int>(model_->nodes.size());
    Vec3 centroid = Vec3::Zero();
    for (const Vec3& x : model_->nodes) centroid += x;
    centroid /= static_cast<double>(N);

    MatX B = MatX::Zero(3 * N, 6);
    for (int n = 0; n < N; ++n) {
        for (int a = 0; a < 3; ++a) B(3 * n + a, a) = 1.0;
        const Vec3 r = model_->nodes[n] - centroid;
        for (int a = 0; a < 3; ++a) {
            Vec3 axis = Vec3::Zero();
            axis[a] = 1.0;
            B.block<3, 1>(3 * n, 3 + a) = axis.cross(r);
        }
    }
    return B;
}

// ---------------------------------------------------------------------
// Assembly
// ---------------------------------------------------------------------

Evaluation evaluate(const BarHingeModel& model, const DofMap& dofs, const VecX& q,
                    double driven_value, EvalOrder order, const MechanicsOptions& opts) {
    if (q.size() != dofs.size()) throw Error("state dimension does not match the dof map");
    const int N = static_cast<int>(model.nodes.size());
    const std::vector<Vec3> x = dofs.positions(q, driven_value);

    const bool want_grad = order != EvalOrder::Energy;
    const bool want_hess = order == EvalOrder::Hessian;

    Evaluation out;
    VecX gN = VecX::Zero(3 * N);
    MatX HN;
    if (want_hess) HN = MatX::Zero(3 * N, 3 * N);
    out.min_hinge_closure = 2.0 * kPi;

    for (const Bar& bar : model.bars) {
        const Vec3 d = x[bar.j] - x[bar.i];
        const double L = d.norm();
        if (L <= 0.0) throw DegenerateTriangle("bar collapsed to zero length");
        const double L0 = bar.rest_length;
        double dEdL = 0.0, d2EdL2 = 0.0;
        if (opts.strain == StrainMeasure::Engineering) {
            const double dl = L - L0;
            out.energy += 0.5 * (bar.ea / L0) * dl * dl;
            dEdL = (bar.ea / L0) * dl;
            d2EdL2 = bar.ea / L0;
        } else {
            const double eps = (L * L - L0 * L0) / (2.0 * L0 * L0);
            out.energy += 0.5 * bar.ea * L0 * eps * eps;
            dEdL = bar.ea * eps * L / L0;
            d2EdL2 = (bar.ea / L0) * (eps + L * L / (L0 * L0));
        }
        if (!want_grad) continue;
        const Vec3 u = d / L;
        gN.segment<3>(3 * bar.j) += dEdL * u;
        gN.segment<3>(3 * bar.i) -= dEdL * u;
        if (want_hess) {
            const Eigen::Matrix3d P = u * u.transpose();
            const Eigen::Matrix3d B =
                d2EdL2 * P + (dEdL / L) * (Eigen::Matrix3d::Identity() - P);
            HN.block<3, 3>(3 * bar.i, 3 * bar.i) += B;
            HN.block<3, 3>(3 * bar.j, 3 * bar.j) += B;
            HN.block<3, 3>(3 * bar.i, 3 * bar.j) -= B;
            HN.block<3, 3>(3 * bar.j, 3 * bar.i) -= B;
        }
    }

    for (const Hinge& h : model.hinges) {
        const std::array<Vec3, 4> p = {x[h.a], x[h.j], x[h.k], x[h.b]};
        const double phi_raw = dihedral_angle(p[0], p[1], p[2], p[3]);
        // Branch continuous about the rest angle so quarter-fold states on
        // either side of the 0/2pi cut stay smooth.
        const double delta = std::remainder(phi_raw - h.rest_angle, 2.0 * kPi);
        const double phi = h.rest_angle + delta;
        out.min_hinge_closure = std::min(out.min_hinge_closure, std::min(phi, 2.0 * kPi - phi));

        out.energy += 0.5 * h.stiffness * delta * delta;
        if (!want_grad) continue;

        Eigen::Matrix<double, 12, 1> g;
        hinge_gradient(p, g);
        const int base[4] = {3 * h.a, 3 * h.j, 3 * h.k, 3 * h.b};
        const double moment = h.stiffness * delta;
        for (int n = 0; n < 4; ++n) gN.segment<3>(base[n]) += moment * g.segment<3>(3 * n);

        if (want_hess) {
            Eigen::Matrix<double, 12, 12> Hphi;
            hinge_hessian(p, Hphi);
            const Eigen::Matrix<double, 12, 12> He =
                h.stiffness * (g * g.transpose()) + moment * Hphi;
            for (int r = 0; r < 4; ++r) {
                for (int c = 0; c < 4; ++c) {
                    HN.block<3, 3>(base[r], base[c]) += He.block<3, 3>(3 * r, 3 * c);
                }
            }
        }
    }

    out.contact_flag = out.min_hinge_closure < deg_to_rad(opts.contact_flag_deg);

    if (want_grad) {
        out.nodal_gradient = gN;
        const MatX J = dofs.jacobian(q, driven_value);
        const VecX r_aug = J.transpose() * gN;
        out.residual = r_aug.head(dofs.size());
        out.driven_gradient = r_aug[dofs.size()];
        if (want_hess) {
            MatX K_aug = J.transpose() * HN * J;
            dofs.add_rotation_curvature(q, driven_value, gN, K_aug);
            out.tangent = K_aug.topLeftCorner(dofs.size(), dofs.size());
            out.driven_column = K_aug.col(dofs.size()).head(dofs.size());
        }
    }
    return out;
}

double system_energy(const BarHingeModel& model, const DofMap& dofs, const VecX& q,
                     double driven_value, const MechanicsOptions& opts) {
    return evaluate(model, dofs, q, driven_value, EvalOrder::Energy, opts).energy;
}

std::pair<VecX, MatX> residual_and_tangent(const BarHingeModel& model, const DofMap& dofs,
                                           const VecX& q, double driven_value,
                                           const MechanicsOptions& opts) {
    Evaluation ev = evaluate(model, dofs, q, driven_value, EvalOrder::Hessian, opts);
    return {std::move(ev.residual), std::move(ev.tangent)};
}

FrameReaction group_reaction(const BarHingeModel&, const std::vector<Vec3>& positions,
                             const VecX& nodal_gradient, const RigidGroup& group) {
    FrameReaction r;
    for (int idx : group.nodes) {
        const Vec3 f = nodal_gradient.segment<3>(3 * idx);
        r.force += f;
        r.torque += (positions[idx] - group.ref_point).cross(f);
    }
    return r;
}

}  // namespace taperfold

#include "mfto/models.hpp"

#include <cmath>
#include <numbers>

namespace mfto {

namespace {
constexpr double kPi = std::numbers::pi;
}

// ---------------------------------------------------------------------------
// DoubleWell2D

DoubleWell2D::DoubleWell2D(double alpha, double m1, double m2, double epsilon)
    : alpha_(alpha), m1_(m1), m2_(m2), epsilon_(epsilon),
      domain_{{-2.0, 2.0, Boundary::truncated}, {-2.0, 2.0, Boundary::truncated}},
      layout_(SubsystemLayout::per_coordinate(2)) {
    const double c1 = v1_mean();
    const double c2 = v2_mean();
    const double a = alpha_;
    auto f1 = [](const Eigen::VectorXd& q) { return v1(q[0]); };
    auto f2 = [a](const Eigen::VectorXd& q) { return 2.0 * std::pow(q[0], 4) - 4.0 * q[0] * q[0] + a; };
    auto f1c = [c1](const Eigen::VectorXd& q) { return v1(q[0]) - c1; };
    auto f2c = [a, c2](const Eigen::VectorXd& q) {
        return 2.0 * std::pow(q[0], 4) - 4.0 * q[0] * q[0] + a - c2;
    };
    interaction_.terms.push_back({c2, {f1, nullptr}});
    interaction_.terms.push_back({c1, {nullptr, f2}});
    interaction_.terms.push_back({-c1 * c2, {nullptr, nullptr}});
    interaction_.terms.push_back({epsilon_, {f1c, f2c}});
}

double DoubleWell2D::v1(double q) {
    return 1.5 * q * q * q * q + 0.25 * q * q * q - 3.0 * q * q - 0.75 * q + 3.0;
}

double DoubleWell2D::dv1(double q) { return 6.0 * q * q * q + 0.75 * q * q - 6.0 * q - 0.75; }

double DoubleWell2D::v2(double q) const { return 2.0 * q * q * q * q - 4.0 * q * q + alpha_; }

double DoubleWell2D::dv2(double q) { return 8.0 * q * q * q - 8.0 * q; }

double DoubleWell2D::v1_mean() {
    // (1/4) * int_{-2}^{2} V1 = (1.5*12.8 - 3*16/3)/4 + 3
    return (1.5 * 12.8 - 16.0) / 4.0 + 3.0;
}

double DoubleWell2D::v2_mean() const { return (2.0 * 12.8 - 4.0 * 16.0 / 3.0) / 4.0 + alpha_; }

double DoubleWell2D::potential(const Eigen::VectorXd& q) const {
    const double c1 = v1_mean(), c2 = v2_mean();
    const double a = v1(q[0]), b = v2(q[1]);
    return c2 * a + c1 * b - c1 * c2 + epsilon_ * (a - c1) * (b - c2);
}

Eigen::VectorXd DoubleWell2D::potential_gradient(const Eigen::VectorXd& q) const {
    const double c1 = v1_mean(), c2 = v2_mean();
    Eigen::VectorXd g(2);
    g[0] = dv1(q[0]) * (c2 + epsilon_ * (v2(q[1]) - c2));
    g[1] = dv2(q[1]) * (c1 + epsilon_ * (v1(q[0]) - c1));
    return g;
}

Eigen::MatrixXd DoubleWell2D::mass_matrix(const Eigen::VectorXd&) const {
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(2, 2);
    M(0, 0) = m1_;
    M(1, 1) = m2_;
    return M;
}

// ---------------------------------------------------------------------------
// ButaneModel

ButaneModel::ButaneModel()
    : k_theta_(65.0 * units::joule_per_kilojoule),
      theta0_(109.47 * kPi / 180.0),
      k_phi_(8.314 * units::joule_per_kilojoule),
      r0_(0.153 * units::metre_per_nanometre),
      m1_(units::molar_mass_from_grams(14.0 * 1.672e-24)),
      m2_(units::molar_mass_from_grams(15.0 * 1.672e-24)),
      domain_{{0.0, kPi, Boundary::reflecting},
              {0.0, kPi, Boundary::reflecting},
              {0.0, 2.0 * kPi, Boundary::periodic}},
      layout_(SubsystemLayout::per_coordinate(3)) {
    auto fa = [this](const Eigen::VectorXd& q) { return v_angle(q[0]); };
    auto ft = [this](const Eigen::VectorXd& q) { return v_torsion(q[0]); };
    interaction_.terms.push_back({1.0, {fa, nullptr, nullptr}});
    interaction_.terms.push_back({1.0, {nullptr, fa, nullptr}});
    interaction_.terms.push_back({1.0, {nullptr, nullptr, ft}});
}

double ButaneModel::v_angle(double theta) const {
    return -k_theta_ * (std::cos(theta - theta0_) - 1.0);
}

double ButaneModel::dv_angle(double theta) const { return k_theta_ * std::sin(theta - theta0_); }

double ButaneModel::v_torsion(double phi) const {
    const double c = std::cos(phi);
    return k_phi_ * (1.116 + c * (-1.462 + c * (-1.578 + c * (0.368 + c * (3.156 + c * 3.788)))));
}

double ButaneModel::dv_torsion(double phi) const {
    const double c = std::cos(phi);
    const double dpoly = -1.462 + c * (2.0 * -1.578 + c * (3.0 * 0.368 + c * (4.0 * 3.156 + c * 5.0 * 3.788)));
    return -k_phi_ * dpoly * std::sin(phi);
}

double ButaneModel::potential(const Eigen::VectorXd& q) const {
    return v_angle(q[0]) + v_angle(q[1]) + v_torsion(q[2]);
}

Eigen::VectorXd ButaneModel::potential_gradient(const Eigen::VectorXd& q) const {
    Eigen::VectorXd g(3);
    g[0] = dv_angle(q[0]);
    g[1] = dv_angle(q[1]);
    g[2] = dv_torsion(q[2]);
    return g;
}

void ButaneModel::cartesian_embedding(const Eigen::VectorXd& q, Eigen::VectorXd& positions,
                                      Eigen::Matrix<double, 12, 3>& jacobian) const {
    const double th1 = q[0], th2 = q[1], phi = q[2];
    if (std::abs(std::sin(th1)) < 1e-15 || std::abs(std::sin(th2)) < 1e-15)
        throw DomainError("butane_ua: degenerate bond angle (theta in {0,pi})");

    // z-matrix placement before center-of-mass removal:
    //   atom 2 at the origin, atom 3 on +x at r0,
    //   atom 1 in the xy-plane making angle theta1 with the 2->3 bond,
    //   atom 4 from atom 3 with angle theta2 and dihedral phi (phi=pi: trans).
    Eigen::Matrix<double, 12, 1> x = Eigen::Matrix<double, 12, 1>::Zero();
    Eigen::Matrix<double, 12, 3> J = Eigen::Matrix<double, 12, 3>::Zero();

    const double s1 = std::sin(th1), c1 = std::cos(th1);
    const double s2 = std::sin(th2), c2 = std::cos(th2);
    const double sp = std::sin(phi), cp = std::cos(phi);

    // atom 1 (CH3)
    x[0] = r0_ * c1;
    x[1] = r0_ * s1;
    J(0, 0) = -r0_ * s1;
    J(1, 0) = r0_ * c1;
    // atom 2 (CH2) at origin, atom 3 (CH2) at (r0, 0, 0): constant
    x[6] = r0_;
    // atom 4 (CH3)
    x[9] = r0_ * (1.0 - c2);
    x[10] = r0_ * s2 * cp;
    x[11] = r0_ * s2 * sp;
    J(9, 1) = r0_ * s2;
    J(10, 1) = r0_ * c2 * cp;
    J(11, 1) = r0_ * c2 * sp;
    J(10, 2) = -r0_ * s2 * sp;
    J(11, 2) = r0_ * s2 * cp;

    const double masses[4] = {m2_, m1_, m1_, m2_};
    const double mtot = 2.0 * (m1_ + m2_);
    Eigen::Vector3d com = Eigen::Vector3d::Zero();
    Eigen::Matrix3d dcom = Eigen::Matrix3d::Zero();
    for (int a = 0; a < 4; ++a) {
        com += masses[a] * x.segment<3>(3 * a);
        dcom += masses[a] * J.block<3, 3>(3 * a, 0);
    }
    com /= mtot;
    dcom /= mtot;
    for (int a = 0; a < 4; ++a) {
        x.segment<3>(3 * a) -= com;
        J.block<3, 3>(3 * a, 0) -= dcom;
    }
    positions = x;
    jacobian = J;
}

Eigen::MatrixXd ButaneModel::mass_matrix(const Eigen::VectorXd& q) const {
    Eigen::VectorXd x;
    Eigen::Matrix<double, 12, 3> J;
    cartesian_embedding(q, x, J);
    const double masses[4] = {m2_, m1_, m1_, m2_};
    Eigen::Matrix3d M = Eigen::Matrix3d::Zero();
    for (int a = 0; a < 4; ++a) {
        const Eigen::Matrix3d Ja = J.block<3, 3>(3 * a, 0).transpose() * J.block<3, 3>(3 * a, 0);
        M += masses[a] * Ja;
    }
    // symmetrize away roundoff
    return 0.5 * (M + M.transpose());
}

std::shared_ptr<HamiltonianModel> make_preset(const std::string& name) {
    if (name == "double_well_2d") return std::make_shared<DoubleWell2D>();
    if (name == "butane_ua") return std::make_shared<ButaneModel>();
    throw ConfigError("unknown model preset: " + name);
}

}  // namespace mfto

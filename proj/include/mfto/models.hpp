#ifndef MFTO_MODELS_HPP
#define MFTO_MODELS_HPP

#include <memory>

#include "mfto/model.hpp"
#include "mfto/units.hpp"

namespace mfto {

// Product double well on [-2,2]^2:
//   V(q1,q2) = V1(q1) * V2(q2),
//   V1(q) = 3/2 q^4 + 1/4 q^3 - 3 q^2 - 3/4 q + 3,
//   V2(q) = 2 q^4 - 4 q^2 + alpha,
// with a coupling knob epsilon interpolating between the separable surrogate
// (epsilon = 0) and the exact product (epsilon = 1):
//   V_eps = c2 V1 + c1 V2 - c1 c2 + eps (V1 - c1)(V2 - c2),
// where c1, c2 are the domain means of V1, V2. Dimensionless model units.
class DoubleWell2D : public HamiltonianModel {
public:
    explicit DoubleWell2D(double alpha = 3.0, double m1 = 1.0, double m2 = 1.0, double epsilon = 1.0);

    std::string id() const override { return "double_well_2d"; }
    int dim() const override { return 2; }
    const std::vector<CoordinateDomain>& domain() const override { return domain_; }
    const SubsystemLayout& layout() const override { return layout_; }

    double potential(const Eigen::VectorXd& q) const override;
    Eigen::VectorXd potential_gradient(const Eigen::VectorXd& q) const override;
    Eigen::MatrixXd mass_matrix(const Eigen::VectorXd& q) const override;
    bool constant_mass() const override { return true; }
    const ProductInteraction* interaction_decomposition() const override { return &interaction_; }

    double alpha() const { return alpha_; }
    double epsilon() const { return epsilon_; }

    static double v1(double q);
    static double dv1(double q);
    double v2(double q) const;
    static double dv2(double q);
    // domain means of the two quartics over [-2,2]
    static double v1_mean();
    double v2_mean() const;

private:
    double alpha_, m1_, m2_, epsilon_;
    std::vector<CoordinateDomain> domain_;
    SubsystemLayout layout_;
    ProductInteraction interaction_;
};

// United-atom n-butane in internal coordinates q = (theta1, theta2, phi) with
// bond lengths frozen at r0. Energies internally in J/mol, masses in kg/mol,
// lengths in metres. The mass matrix comes from the z-matrix embedding into
// cartesian coordinates with center-of-mass removal (no angular-momentum
// frame projection).
class ButaneModel : public HamiltonianModel {
public:
    ButaneModel();

    std::string id() const override { return "butane_ua"; }
    int dim() const override { return 3; }
    const std::vector<CoordinateDomain>& domain() const override { return domain_; }
    const SubsystemLayout& layout() const override { return layout_; }

    double potential(const Eigen::VectorXd& q) const override;
    Eigen::VectorXd potential_gradient(const Eigen::VectorXd& q) const override;
    Eigen::MatrixXd mass_matrix(const Eigen::VectorXd& q) const override;
    const ProductInteraction* interaction_decomposition() const override { return &interaction_; }

    // Bond-angle term, J/mol. Zero at theta0.
    double v_angle(double theta) const;
    double dv_angle(double theta) const;
    // Torsion term, J/mol. Zero at phi = pi (trans).
    double v_torsion(double phi) const;
    double dv_torsion(double phi) const;

    // Four 3D atom positions (metres, row-major in a 12-vector, atom order
    // CH3-CH2-CH2-CH3) with the center of mass at the origin, plus the
    // 12x3 Jacobian d(positions)/dq. Throws DomainError at theta in {0,pi}.
    void cartesian_embedding(const Eigen::VectorXd& q, Eigen::VectorXd& positions,
                             Eigen::Matrix<double, 12, 3>& jacobian) const;

    double bond_length() const { return r0_; }
    double mass_ch2() const { return m1_; }
    double mass_ch3() const { return m2_; }
    double theta0() const { return theta0_; }

private:
    double k_theta_;   // J/mol
    double theta0_;    // rad
    double k_phi_;     // J/mol
    double r0_;        // m
    double m1_, m2_;   // kg/mol
    std::vector<CoordinateDomain> domain_;
    SubsystemLayout layout_;
    ProductInteraction interaction_;
};

// Built-in presets: "double_well_2d" and "butane_ua".
std::shared_ptr<HamiltonianModel> make_preset(const std::string& name);

}  // namespace mfto

#endif

#pragma once

#include <memory>
#include <string>
#include <vector>

#include "treebec/krein.hpp"
#include "treebec/pf.hpp"
#include "treebec/spectral.hpp"

namespace treebec::thermo {

// b(x) = 1/(e^x - 1) and its regular part f(x) = b(x) - 1/x, f(0) = -1/2.
struct BoseSplit {
    double b;
    double f;
};
BoseSplit bose_split(double x);
double bose(double x);
// Regular part, also defined for x < 0 (entire away from 2 pi i Z \ {0}).
double bose_regular(double x);

// (1/N) sum_k b(beta (h_k - mu)); h are the energies of H on the finite volume.
double finite_density(const Vec& h, double beta, double mu);
double solve_chemical(const Vec& h, double beta, double rho);

// 0 on [0, eps/2], linear on [eps/2, eps], 1 beyond.
double mollifier(double h, double eps);

// A perturbed ball with its full spectrum, energies measured from lambda*.
struct DenseVolume {
    int n = 0;
    std::int64_t size = 0;
    double lambda_max = 0.0;
    Vec h;     // lambda* - eigenvalues of A_{Lambda_n}, ascending
    Vec h_free;  // lambda* - eigenvalues of the unperturbed ball, ascending
};
DenseVolume dense_volume(const graph::ModelSpec& spec, int n, double lambda_star,
                         std::int64_t dense_limit = 4096);

struct SeriesDensity {
    double value;
    double error;  // truncation of the j-series plus the Phi tails
    int terms;
    bool divergent;
};
SeriesDensity critical_density_series(int Q, double em, double beta, double tol = 1e-13,
                                      int k_max = 200, double cap = 1e6, int max_terms = 100000);

// Mollified low/high-energy masses over (eps, n), extrapolated n -> inf from the three
// largest volumes, then eps -> 0 by a linear fit.
struct MollifiedTable {
    Vec eps;
    std::vector<int> ns;
    std::vector<Vec> raw;  // raw[e][k]: value at eps[e], ns[k]
    Vec per_eps;           // n-extrapolated
    double value = 0.0;
    double n_residual = 0.0;    // spread between extrapolated and largest-n values
    double eps_residual = 0.0;  // residual of the eps -> 0 fit
};
MollifiedTable critical_density_mollified(const std::vector<DenseVolume>& vols, int Q, double em,
                                          double beta, const Vec& mus,
                                          const Vec& eps_fractions = {0.4, 0.2, 0.1});

enum class Rule { Fixed, TargetDensity, Fregg1, Fregg3 };
struct ScheduleRule {
    Rule rule = Rule::Fixed;
    double param = 0.0;
};
ScheduleRule parse_rule(const std::string& text);  // "fixed:-0.5", "density:2", "fregg1:1", "fregg3:1"
std::string rule_token(const ScheduleRule& r);

// mu_n for one volume. `h` (energies) is needed only by TargetDensity.
double realize_mu(const ScheduleRule& rule, const krein::ModelNorm& norm, const graph::Model& m,
                  double lambda_max, double pf_norm2, double beta, const Vec* h = nullptr);

struct MuSchedule {
    ScheduleRule rule;
    std::vector<int> ns;
    Vec mu;
    Vec lambda_n;
};
MuSchedule mu_schedule(const krein::ModelNorm& norm, const std::vector<pf::FiniteVolume>& fvs,
                       const ScheduleRule& rule, double beta = 1.0);

MollifiedTable condensate_fraction(const std::vector<DenseVolume>& vols, int Q, double em,
                                   double beta, const Vec& mus, const Vec& eps_fractions);

struct GibbsOptions {
    std::int64_t dense_limit = 4096;
    double tol = 1e-10;
    const spectral::Eigensystem* eigensystem = nullptr;  // reuse a cached decomposition
};

// u -> b(beta (H - mu)) u with H = lambda* - A on the finite volume.
class BoseOperator {
public:
    BoseOperator(const pf::FiniteVolume& fv, double lambda_star, double beta, double mu,
                 const GibbsOptions& opt = {});
    Vec apply(const Vec& u) const;
    bool dense() const { return eig_ != nullptr; }

private:
    const pf::FiniteVolume& fv_;
    double lambda_n_, beta_;
    GibbsOptions opt_;
    std::shared_ptr<const spectral::Eigensystem> owned_;
    const spectral::Eigensystem* eig_ = nullptr;
    Vec pf_unit_;
    numerics::ChebyshevSeries f_series_;
};

double gibbs_two_point(const pf::FiniteVolume& fv, double lambda_star, double beta, double mu,
                       std::int32_t x, std::int32_t y, const GibbsOptions& opt = {});

// Diagonal value <b(beta(H - mu)) u, u> for a complex vector.
double gibbs_form(const BoseOperator& op, const CVec& u);

struct OmegaD {
    double value;
    double bounded_part;
    double resolvent_part;
    double condensate_part;
    int chebyshev_degree;
    int ball_radius;
};
// beta = 1 limit state at mu = 0 plus the condensate D v(x) v(y).
OmegaD omega_D(const krein::ModelNorm& norm, const krein::TransienceReport& transience, double D,
               std::int32_t x, std::int32_t y);

struct Decomposition {
    double rho;
    double rho_c;
    double a_proxy;
    double term2;
    double term3;
    double residual;
};
Decomposition density_decomposition(const DenseVolume& vol, double beta, double mu, double rho_c);

struct ProbeRow {
    int n;
    double mu;
    double value;
    double witness;  // 1 / (||v_n||^2 (lambda* - lambda_max - mu_n))
};
struct DivergenceProbe {
    std::vector<ProbeRow> rows;
    double growth;  // last / first
    bool diverging;
};
DivergenceProbe divergence_probe(const krein::ModelNorm& norm, const std::vector<pf::FiniteVolume>& fvs,
                                 const ScheduleRule& rule, std::int32_t x, double beta = 1.0,
                                 double factor = 4.0, const GibbsOptions& opt = {});

// C_D(Lambda_n) = D ||v restricted to Lambda_n||^2 / |Lambda_n|.
double condensate_density(const graph::Model& m, double lambda_star, double D);

// Samples of 1/(1 - ||S_n(lambda)||) against the bound (gamma - ||A_B||)/(lambda - ||A_Lambda||)
// and the chord bound implied by concavity of lambda -> 1 - ||S_n(lambda)||.
struct KorilaRow {
    double lambda;
    double lhs;
    double stated;
    double chord;
};
std::vector<KorilaRow> korila_table(const graph::ModelSpec& spec, int n, double gamma, int samples);

}  // namespace treebec::thermo

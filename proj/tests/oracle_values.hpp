#pragma once

// Frozen values from tests/oracles/oracles.py (mpmath, 60 digits), independent of the
// library. Regenerate with: python3 tests/oracles/oracles.py

namespace oracle {

inline constexpr double kPsi0TubeR03C2 = 0.15136135474566862;
inline constexpr double kPsi0TubeR03C4 = 0.13148260147625823;
inline constexpr double kPsiTubeR03C2At02 = 0.16484912240736377;
inline constexpr double kDPsiTubeR03C2At02 = 0.13873616072034821;
inline constexpr double kTubeRadiusMax = 0.35187288780979608;
inline constexpr double kQuantumR03 = 1.9020628804255645;

// critical points t_k of exp(-1/t^2) sin(1/t) + 1, branch 1/t in (k pi, k pi + pi/2)
inline constexpr const char* kRootT1 = "0.3037381028930505911340524915115508684962";
inline constexpr double kRootT[5] = {0.30373810289305059, 0.15719265507373234,
                                     0.10551321638269888, 0.079327219855862964,
                                     0.063533534326867745};
inline constexpr double kGapLog10[5] = {-4.431722770416683, -17.582715784746532,
                                        -39.188635096070349, -69.317159360124312,
                                        -107.99061490415281};
inline constexpr double kGap1 = 0.000037006433300647697287;
inline constexpr double kTkKPi[5] = {0.95422139266410846, 0.98767058075582374,
                                     0.99443863633355108, 0.99685524451552586,
                                     0.99798242348941329};

// beta = 0.05
inline constexpr double kBeta005T[3] = {0.23224480278006519, 0.13834875667291812,
                                        0.098036691834524995};
inline constexpr double kBeta005Gap[3] = {4.5676010570016526, 0.74720431957075069,
                                          0.048420613512459386};

inline constexpr double kIdentityEnergySpectrumT1 = 12.566333607925872;
inline constexpr double kSpectrumDPsiAt035 = 0.0059624037037800318;
inline constexpr double kBallEnergyIdentityR03 = 0.28062911529304794;
inline constexpr double kBubbleFracR10 = 0.9900990099009901;
inline constexpr double kBubbleFracR20 = 0.99750623441396509;
// 4 pi w^2 A Psi(A) at w = 3, G = 1, tube r = 0.3
inline constexpr double kNeckClosedFormW3A02 = 0.70484900808800586;
inline constexpr double kNeckClosedFormW3A035 = 2.2923450054793585;

inline constexpr unsigned long long kFnvEmpty = 0xcbf29ce484222325ull;
inline constexpr unsigned long long kFnvLedgerConfig = 0x2a504837ce1e5d8cull;

inline constexpr double kLedgerR03Bound16 = 4.5238934211693023;
inline constexpr double kLedgerR03Bound48 = 13.571680263507907;
inline constexpr double kLedgerR03Monotonicity = 20.293724754284915;

}  // namespace oracle

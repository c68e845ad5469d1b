/** Gaussian tail probability Q(x) = P(N(0,1) > x) via the complementary
 * error function. */

const ERFC_COF = [
  -1.3026537197817094, 6.4196979235649026e-1, 1.9476473204185836e-2,
  -9.561514786808631e-3, -9.46595344482036e-4, 3.66839497852761e-4,
  4.2523324806907e-5, -2.0278578112534e-5, -1.624290004647e-6,
  1.303655835580e-6, 1.5626441722e-8, -8.5238095915e-8,
  6.529054439e-9, 5.059343495e-9, -9.91364156e-10,
  -2.27365122e-10, 9.6467911e-11, 2.394038e-12,
  -6.886027e-12, 8.94487e-13, 3.13092e-13,
  -1.12708e-13, 3.81e-16, 7.106e-15,
];

/** Chebyshev-fit complementary error function, good to ~1e-7 relative. */
export function erfc(x: number): number {
  const z = Math.abs(x);
  const t = 2 / (2 + z);
  const ty = 4 * t - 2;
  let d = 0;
  let dd = 0;
  for (let j = ERFC_COF.length - 1; j > 0; j--) {
    const tmp = d;
    d = ty * d - dd + ERFC_COF[j];
    dd = tmp;
  }
  const ans = t * Math.exp(-z * z + 0.5 * (ERFC_COF[0] + ty * d) - dd);
  return x >= 0 ? ans : 2 - ans;
}

export function qfunc(x: number): number {
  return 0.5 * erfc(x / Math.SQRT2);
}

/** Analytic QPSK-over-AWGN bit error rate at a given Eb/N0 in dB. */
export function awgnReferenceBer(ebn0Db: number): number {
  const ebn0 = Math.pow(10, ebn0Db / 10);
  return qfunc(Math.sqrt(2 * ebn0));
}

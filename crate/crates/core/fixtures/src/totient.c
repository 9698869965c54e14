/* Two independent routes to Euler's totient, both via the product formula. */

static int strip(int m, int p) {
  while (m % p == 0)
    m /= p;
  return m;
}

static int phi_from(int acc, int m, int p) {
  if (p * p > m)
    return m > 1 ? acc - acc / m : acc;
  if (m % p == 0)
    return phi_from(acc - acc / p, strip(m, p), p + 1);
  return phi_from(acc, m, p + 1);
}

int totient_recursive(int n) { return phi_from(n, n, 2); }

int totient_iterative(int n) {
  int result = n;
  int m = n;
  for (int p = 2; p * p <= m; ++p) {
    if (m % p != 0)
      continue;
    do {
      m /= p;
    } while (m % p == 0);
    result -= result / p;
  }
  if (m > 1)
    result -= result / m;
  return result;
}

static int gcd(int a, int b) {
  while (b != 0) {
    int t = a % b;
    a = b;
    b = t;
  }
  return a;
}

int totient_count(int n) {
  int count = 0;
  for (int k = 1; k <= n; k++)
    if (gcd(k, n) == 1)
      count++;
  return count;
}

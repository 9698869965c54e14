static int big[100000];

int fill(int n, int secret) {
  for (int i = 0; i < n; i++)
    big[i] = secret + i;
  return big[n - 1];
}

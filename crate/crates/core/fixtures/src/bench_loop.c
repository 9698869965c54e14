int assign_loop(int n) {
  int x = 0;
  for (int i = 0; i < n; i++)
    x = n;
  return x;
}

/* A loop guarded by a tainted condition; when the guard fails on entry the
 * body never runs and nothing inside it picks up the guard's taint. */

int escape_while(int y) {
  int x = 0;
  while (y < 42) {
    x++;
    y++;
  }
  return x;
}

int escape_for(int y) {
  int x = 5;
  for (int i = y; i < 42; i++)
    x += 2;
  return x;
}

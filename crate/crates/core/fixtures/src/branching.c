int classify(int x) {
  if (x > 10)
    return 7;
  return 3;
}

int pick(int k) {
  switch (k) {
  case 0:
    return 11;
  case 1:
    return 23;
  case 2:
    return 37;
  case 3:
    return 41;
  case 4:
    return 59;
  default:
    return 5;
  }
}

int mix(int a, int b) { return b > 0 ? a : 0; }

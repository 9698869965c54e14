static const int table[8] = {101, 211, 307, 401, 503, 601, 701, 809};
static int buf[64];
static int data[32];

int lookup(int idx) { return table[idx & 7]; }

int *buf_base(void) { return buf; }

int store_adjacent(int secret) {
  buf[5] = secret;
  return buf[4];
}

int store_overlap(int secret) {
  buf[5] = secret;
  volatile unsigned char *p = (volatile unsigned char *)buf + 18;
  return p[0] | (p[1] << 8) | (p[2] << 16) | (p[3] << 24);
}

int array_kth(int seed, int k) {
  for (int i = 0; i < 32; i++)
    data[i] = (i * 37 + seed) % 101;
  for (int i = 1; i < 32; i++) {
    int key = data[i];
    int j = i;
    while (j > 0 && data[j - 1] > key) {
      data[j] = data[j - 1];
      j--;
    }
    data[j] = key;
  }
  return data[k & 31];
}

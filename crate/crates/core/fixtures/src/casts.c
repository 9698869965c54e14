int narrow(long long x) { return (int)x; }

long long widen(int x) { return (long long)x * 3; }

long long widen_u(unsigned x) { return (long long)x + 1; }

int high_plus(long long a, int b) { return (int)(a >> 32) + b; }

public class Power {
    public static long power(long base, int exponent) {
        long result = 1;
        int remaining = exponent;
        while (remaining > 0) {
            result *= base;
            remaining--;
        }
        return result;
    }

    public static boolean isPowerOfTwo(int n) {
        if (n <= 0) {
            return false;
        }
        return (n & (n - 1)) == 0;
    }
}

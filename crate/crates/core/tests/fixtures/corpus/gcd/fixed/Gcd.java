public class Gcd {
    public static int gcd(int a, int b) {
        while (b != 0) {
            int rest = a % b;
            a = b;
            b = rest;
        }
        return a;
    }

    public static int lcm(int a, int b) {
        int g = gcd(a, b);
        return a / g * b;
    }
}

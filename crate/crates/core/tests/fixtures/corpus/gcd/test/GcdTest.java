public class GcdTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Gcd.gcd(12, 18) == 6, "gcd");
        check(Gcd.gcd(7, 0) == 7, "zero");
        check(Gcd.lcm(4, 6) == 12, "lcm");
        System.out.println("OK");
    }
}

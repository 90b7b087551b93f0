public class FactorialTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Factorial.factorial(5) == 120L, "fact5");
        check(Factorial.factorial(0) == 1L, "fact0");
        check(Factorial.choose(5, 2) == 10L, "choose");
        System.out.println("OK");
    }
}

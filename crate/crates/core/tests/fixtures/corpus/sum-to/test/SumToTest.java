public class SumToTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(SumTo.sumTo(4) == 10, "sumTo4");
        check(SumTo.sumTo(0) == 0, "sumTo0");
        check(SumTo.sumOfSquares(3) == 14, "squares");
        System.out.println("OK");
    }
}

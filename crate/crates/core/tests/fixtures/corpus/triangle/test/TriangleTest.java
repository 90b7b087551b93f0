public class TriangleTest {
    static void check(boolean ok, String name) {
        if (!ok) {
            System.out.println("FAIL " + name);
            System.exit(1);
        }
    }

    public static void main(String[] args) {
        check(Triangle.classify(2, 2, 2).equals("equilateral"), "equi");
        check(Triangle.classify(2, 3, 2).equals("isosceles"), "iso");
        check(Triangle.classify(3, 4, 5).equals("scalene"), "scalene");
        check(Triangle.classify(1, 2, 8).equals("invalid"), "invalid");
        System.out.println("OK");
    }
}
